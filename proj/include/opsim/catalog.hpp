// Catalog of concrete costs: quadratics, least squares, Huber, logistic ERM,
// the consensus indicator, and the zero function. Closed-form proxes where
// they exist, declared curvature constants computed from the parameters.
#pragma once

#include <string>
#include <vector>

#include "opsim/cost.hpp"

namespace opsim {

/// f(x) = 1/2 (x-a)' Q (x-a) with Q symmetric PSD.
CostFunction make_quadratic(const Mat& Q, const Vec& center);

/// Scalar convenience: f(x) = curvature/2 (x - center)^2.
CostFunction make_scalar_quadratic(double curvature, double center);

/// f(x) = 1/2 ||A x - b||^2.
CostFunction make_least_squares(const Mat& A, const Vec& b);

/// Componentwise Huber loss around `center`: quadratic inside |t| <= delta,
/// linear growth delta(|t| - delta/2) outside.
CostFunction make_huber(int dim, double delta = 1.0, const Vec& center = Vec());

/// Regularized logistic empirical risk:
///   f(x) = 1/m sum_h log(1 + exp(-label_h <data_h, x>)) + reg/2 ||x||^2.
/// Labels must be +-1. The prox has no closed form and uses the inner solver.
CostFunction make_logistic_erm(const Mat& data, const Vec& labels, double reg = 0.0);

/// Indicator of the consensus set {x : x_1 = ... = x_N} over R^{N*n}; the prox
/// projects every block onto the block mean.
CostFunction make_consensus_indicator(int n_agents, int block_dim);

/// f == 0; prox is the identity.
CostFunction make_zero(int dim);

struct LabeledMatrix {
  Mat data;    // one row per datapoint
  Vec labels;  // +-1
};

/// Plain-text numeric matrix, one datapoint per row, last column the +-1 label.
LabeledMatrix load_labeled_matrix(const std::string& path);

}  // namespace opsim
