#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cpgeo/geometry.hpp"

namespace cpgeo::fitting {

struct OlsFit {
  Eigen::VectorXd coefficients;  // intercept first
  Eigen::VectorXd residuals;
  double r2 = 0.0;
};

// Ordinary least squares via column-pivoted Householder QR. `design` must
// already contain the intercept column. Throws DegenerateDesign when rank-deficient.
OlsFit ordinary_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

struct HierarchicalRegressionResult {
  double r2_step1 = 0.0;
  double r2_step2 = 0.0;
  double delta_r2 = 0.0;
  double f_stat = 0.0;
  double p_value = 1.0;
  double coef_logdist = 0.0;   // step 2
  double coef_boundary = 0.0;  // step 2
  double intercept = 0.0;      // step 2
  std::size_t n_pairs = 0;
};

// Step 1: distances ~ log_dists. Step 2: + boundary indicator.
// F = dR2 (n - 3) / (1 - R2_step2) on (1, n - 3) degrees of freedom.
HierarchicalRegressionResult hierarchical_regression(std::span<const double> distances,
                                                     std::span<const double> log_dists,
                                                     const std::vector<bool>& cross_flags);

// Upper-tail probability of the F(d1, d2) distribution.
double f_distribution_sf(double f, double d1, double d2);

// Solves (X^T X + penalty I) w = X^T y. Uses the dual form when X is wide.
Eigen::VectorXd solve_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                            double penalty);

struct ProbeResult {
  std::size_t layer = 0;
  Eigen::VectorXd weights;         // hidden-state space
  double bias = 0.0;
  double ridge_penalty = 1.0;
  double train_accuracy = 0.0;
  double weight_norm = 0.0;
  Eigen::VectorXd unit_direction;  // weights / |weights|

  double score(const Eigen::VectorXd& x) const { return weights.dot(x) + bias; }
};

inline constexpr double kDefaultRidgePenalty = 1.0;

// Ridge classifier on centroids with labels encoded -1/+1. Features are
// centered and scaled to unit variance per dimension before solving; the
// returned weights are mapped back to hidden-state coordinates.
ProbeResult ridge_probe(const CentroidSet& centroids, const std::vector<bool>& labels,
                        double penalty = kDefaultRidgePenalty);

struct SigmoidFit {
  double crossover = 0.0;  // x0
  double slope = 0.0;      // k
  double r2 = 0.0;
  double sse = 0.0;
  bool converged = false;
  // Converged, crossover inside the probed range and |k| * range >= 1.
  bool crossover_defined = false;

  double operator()(double x) const;
};

double logistic(double x, double crossover, double slope);
// Sum of squared residuals of the 2-parameter logistic at (crossover, slope).
double sigmoid_sse(std::span<const double> x, std::span<const double> p, double crossover, double slope);

struct SigmoidStart {
  double crossover;
  double slope;
};

// Quartile crossovers times slopes {+-0.5, +-2, +-8}.
std::vector<SigmoidStart> sigmoid_starts(std::span<const double> x);

// Multi-start damped Gauss-Newton (Levenberg-Marquardt) fit of
// p(x) = 1 / (1 + exp(-k (x - x0))).
SigmoidFit fit_sigmoid(std::span<const double> x, std::span<const double> p);

// Leading eigenvector of the centered covariance of the rows, sign-fixed so
// that its largest-magnitude entry is positive.
Eigen::VectorXd top_principal_component(const Eigen::MatrixXd& vectors);

}  // namespace cpgeo::fitting
