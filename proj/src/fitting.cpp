#include "cpgeo/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/fisher_f.hpp>

#include "cpgeo/error.hpp"

namespace cpgeo::fitting {

OlsFit ordinary_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  if (design.rows() != response.rows()) throw DegenerateDesign("design/response row mismatch");
  if (design.rows() <= design.cols()) throw DegenerateDesign("more parameters than observations");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) throw DegenerateDesign("design matrix is rank-deficient");

  OlsFit fit;
  fit.coefficients = qr.solve(response);
  fit.residuals = response - design * fit.coefficients;
  const double centered_ss = (response.array() - response.mean()).square().sum();
  if (centered_ss <= 0.0) throw DegenerateInput("response has zero variance");
  fit.r2 = std::clamp(1.0 - fit.residuals.squaredNorm() / centered_ss, 0.0, 1.0);
  return fit;
}

double f_distribution_sf(double f, double d1, double d2) {
  if (std::isinf(f)) return 0.0;
  if (f <= 0.0) return 1.0;
  boost::math::fisher_f dist(d1, d2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

HierarchicalRegressionResult hierarchical_regression(std::span<const double> distances,
                                                     std::span<const double> log_dists,
                                                     const std::vector<bool>& cross_flags) {
  const std::size_t n = distances.size();
  if (log_dists.size() != n || cross_flags.size() != n)
    throw DegenerateDesign("hierarchical_regression: input lengths differ");
  if (n < 4) throw DegenerateDesign("hierarchical_regression needs at least 4 pairs");
  if (std::all_of(log_dists.begin(), log_dists.end(), [&](double v) { return v == log_dists[0]; }))
    throw DegenerateDesign("log distances are all equal");
  if (std::all_of(cross_flags.begin(), cross_flags.end(), [&](bool f) { return f == cross_flags[0]; }))
    throw DegenerateDesign("boundary indicator is constant");

  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::VectorXd y(rows);
  Eigen::MatrixXd step1(rows, 2), step2(rows, 3);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto u = static_cast<std::size_t>(i);
    y(i) = distances[u];
    step1(i, 0) = step2(i, 0) = 1.0;
    step1(i, 1) = step2(i, 1) = log_dists[u];
    step2(i, 2) = cross_flags[u] ? 1.0 : 0.0;
  }
  const auto fit1 = ordinary_least_squares(step1, y);
  const auto fit2 = ordinary_least_squares(step2, y);

  HierarchicalRegressionResult out;
  out.n_pairs = n;
  out.r2_step1 = fit1.r2;
  out.r2_step2 = std::max(fit2.r2, fit1.r2);
  out.delta_r2 = out.r2_step2 - out.r2_step1;
  out.intercept = fit2.coefficients(0);
  out.coef_logdist = fit2.coefficients(1);
  out.coef_boundary = fit2.coefficients(2);
  const double dof = static_cast<double>(n - 3);
  const double unexplained = 1.0 - out.r2_step2;
  if (unexplained <= 0.0) {
    out.f_stat = out.delta_r2 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    out.f_stat = out.delta_r2 * dof / unexplained;
  }
  out.p_value = f_distribution_sf(out.f_stat, 1.0, dof);
  return out;
}

Eigen::VectorXd solve_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                            double penalty) {
  if (!(penalty > 0.0)) throw DegenerateDesign("ridge penalty must be positive");
  if (features.rows() != targets.rows()) throw DegenerateDesign("ridge: row mismatch");
  const auto n = features.rows(), d = features.cols();
  if (d <= n) {
    Eigen::MatrixXd gram = features.transpose() * features;
    gram.diagonal().array() += penalty;
    return gram.ldlt().solve(features.transpose() * targets);
  }
  // w = X^T (X X^T + penalty I)^-1 y, identical to the primal solution.
  Eigen::MatrixXd kernel = features * features.transpose();
  kernel.diagonal().array() += penalty;
  return features.transpose() * kernel.ldlt().solve(targets);
}

ProbeResult ridge_probe(const CentroidSet& centroids, const std::vector<bool>& labels,
                        double penalty) {
  const Eigen::MatrixXd& x = centroids.vectors;
  if (static_cast<std::size_t>(x.rows()) != labels.size())
    throw DegenerateDesign("ridge_probe: one label per centroid required");
  const auto positives = std::count(labels.begin(), labels.end(), true);
  if (positives == 0 || positives == static_cast<long>(labels.size()))
    throw DegenerateDesign("ridge_probe: both classes must be present");

  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = labels[static_cast<std::size_t>(i)] ? 1.0 : -1.0;

  const Eigen::RowVectorXd mu = x.colwise().mean();
  Eigen::MatrixXd z = x.rowwise() - mu;
  Eigen::VectorXd scale(x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const double sd = std::sqrt(z.col(k).squaredNorm() / static_cast<double>(x.rows()));
    scale(k) = sd;
    if (sd > 0.0) z.col(k) /= sd;
  }
  const double y_mean = y.mean();
  const Eigen::VectorXd w_std = solve_ridge(z, y.array() - y_mean, penalty);

  ProbeResult out;
  out.layer = centroids.layer;
  out.ridge_penalty = penalty;
  out.weights = Eigen::VectorXd::Zero(x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    if (scale(k) > 0.0) out.weights(k) = w_std(k) / scale(k);
  }
  out.bias = y_mean - mu.dot(out.weights);
  out.weight_norm = out.weights.norm();
  if (!(out.weight_norm > 0.0)) throw DegenerateDesign("ridge_probe: features carry no signal");
  out.unit_direction = out.weights / out.weight_norm;

  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const bool predicted = out.score(x.row(i).transpose()) > 0.0;
    if (predicted == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  out.train_accuracy = static_cast<double>(correct) / static_cast<double>(x.rows());
  return out;
}

// ---------------------------------------------------------------------------
// Sigmoid

double logistic(double x, double crossover, double slope) {
  const double t = -slope * (x - crossover);
  if (t > 0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

double SigmoidFit::operator()(double x) const { return logistic(x, crossover, slope); }

double sigmoid_sse(std::span<const double> x, std::span<const double> p, double crossover, double slope) {
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = p[i] - logistic(x[i], crossover, slope);
    sse += r * r;
  }
  return sse;
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct LmOutcome {
  double crossover;
  double slope;
  double sse;
  bool converged;
};

constexpr int kMaxIterations = 200;
constexpr double kStepTolerance = 1e-9;

LmOutcome levenberg_marquardt(std::span<const double> x, std::span<const double> p, SigmoidStart start) {
  double x0 = start.crossover, k = start.slope;
  double sse = sigmoid_sse(x, p, x0, k);
  double damping = 1e-3;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double f = logistic(x[i], x0, k);
      const double g = f * (1.0 - f);
      const Eigen::Vector2d grad(-k * g, (x[i] - x0) * g);
      jtj += grad * grad.transpose();
      jtr += grad * (p[i] - f);
    }
    Eigen::Matrix2d a = jtj;
    a.diagonal().array() += damping * (1.0 + jtj.diagonal().maxCoeff());
    const Eigen::Vector2d step = a.ldlt().solve(jtr);
    if (!step.allFinite()) break;
    if (step.norm() < kStepTolerance) return {x0, k, sse, true};
    const double trial = sigmoid_sse(x, p, x0 + step(0), k + step(1));
    if (trial < sse) {
      x0 += step(0);
      k += step(1);
      sse = trial;
      damping = std::max(damping * 0.3, 1e-12);
    } else {
      damping *= 10.0;
      if (damping > 1e12) return {x0, k, sse, true};  // stationary: no descent direction left
    }
  }
  return {x0, k, sse, false};
}

}  // namespace

std::vector<SigmoidStart> sigmoid_starts(std::span<const double> x) {
  const std::vector<double> xv(x.begin(), x.end());
  std::vector<SigmoidStart> starts;
  for (double q : {0.25, 0.5, 0.75}) {
    const double c = quantile(xv, q);
    for (double k : {0.5, -0.5, 2.0, -2.0, 8.0, -8.0}) starts.push_back({c, k});
  }
  return starts;
}

SigmoidFit fit_sigmoid(std::span<const double> x, std::span<const double> p) {
  if (x.size() != p.size()) throw TooFewPoints("fit_sigmoid: x and p lengths differ");
  if (x.size() < 4) throw TooFewPoints("fit_sigmoid needs at least 4 points");
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("fit_sigmoid: probabilities must lie in [0, 1]");
  }

  LmOutcome best{0.0, 0.0, std::numeric_limits<double>::infinity(), false};
  for (const auto& start : sigmoid_starts(x)) {
    const auto outcome = levenberg_marquardt(x, p, start);
    // Prefer converged solutions; among equals keep the lower objective.
    const bool better = (outcome.converged && !best.converged) ||
                        (outcome.converged == best.converged && outcome.sse < best.sse);
    if (better) best = outcome;
  }

  SigmoidFit fit;
  fit.crossover = best.crossover;
  fit.slope = best.slope;
  fit.sse = best.sse;
  fit.converged = best.converged;
  const double mean_p = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
  double sst = 0.0;
  for (double v : p) sst += (v - mean_p) * (v - mean_p);
  fit.r2 = sst > 0.0 ? std::clamp(1.0 - best.sse / sst, 0.0, 1.0) : 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  fit.crossover_defined = fit.converged && fit.crossover >= *lo && fit.crossover <= *hi &&
                          std::abs(fit.slope) * (*hi - *lo) >= 1.0;
  return fit;
}

Eigen::VectorXd top_principal_component(const Eigen::MatrixXd& vectors) {
  if (vectors.rows() < 2) throw DegenerateInput("top_principal_component needs at least 2 points");
  const Eigen::MatrixXd centered = vectors.rowwise() - vectors.colwise().mean();
  const double scale = vectors.cwiseAbs().maxCoeff();
  if (centered.norm() <= 1e-14 * std::max(1.0, scale))
    throw DegenerateInput("top_principal_component: zero variance");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  Eigen::VectorXd v = svd.matrixV().col(0);
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
  return v.normalized();
}

}  // namespace cpgeo::fitting
