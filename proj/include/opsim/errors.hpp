// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace opsim {

/// Iterates left the trusted region (non-finite or |coordinate| > divergence_limit()).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An inner solver (prox / reference solve) failed to reach its tolerance.
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration; carries the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

constexpr double divergence_limit() { return 1e12; }

}  // namespace opsim
