#include "cpgeo/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "cpgeo/error.hpp"
#include "cpgeo/stats.hpp"

namespace cpgeo {

std::string to_string(Metric metric) {
  return metric == Metric::cosine ? "cosine" : "euclidean";
}

Metric metric_from_string(const std::string& name) {
  if (name == "cosine") return Metric::cosine;
  if (name == "euclidean") return Metric::euclidean;
  throw ConfigError("unknown metric '" + name + "' (expected cosine or euclidean)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::continuous_log: return "continuous_log";
    case ModelKind::cp_additive: return "cp_additive";
    case ModelKind::cp_multiplicative: return "cp_multiplicative";
    case ModelKind::categorical: return "categorical";
    case ModelKind::linear: return "linear";
    case ModelKind::ordinal_continuous: return "ordinal_continuous";
  }
  return "continuous_log";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (auto k : {ModelKind::continuous_log, ModelKind::cp_additive, ModelKind::cp_multiplicative,
                 ModelKind::categorical, ModelKind::linear, ModelKind::ordinal_continuous}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown theoretical model '" + name + "'");
}

void TheoreticalRdmSpec::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw ValidationError("lambda must be finite and >= 0");
  if (!std::isfinite(gamma) || gamma < 0.0) throw ValidationError("gamma must be finite and >= 0");
}

CentroidSet compute_centroids(const HiddenStateBundle& bundle, std::size_t layer) {
  if (layer >= bundle.n_layers)
    throw IndexError("layer " + std::to_string(layer) + " out of range (bundle has " +
                     std::to_string(bundle.n_layers) + ")");
  const auto n = static_cast<Eigen::Index>(bundle.n_stimuli());
  const auto d = static_cast<Eigen::Index>(bundle.hidden_dim);
  CentroidSet out;
  out.layer = layer;
  out.vectors = Eigen::MatrixXd::Zero(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < bundle.n_sentences; ++s) {
      const auto v = bundle.vector(layer, static_cast<std::size_t>(i), s);
      for (Eigen::Index k = 0; k < d; ++k) out.vectors(i, k) += static_cast<double>(v[k]);
    }
  }
  out.vectors /= static_cast<double>(bundle.n_sentences);
  return out;
}

double pair_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v, Metric metric) {
  if (metric == Metric::euclidean) return (u - v).norm();
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw DegenerateVector("zero-norm vector under cosine distance");
  const double d = 1.0 - u.dot(v) / (nu * nv);
  if (d > 2.0 + 1e-12) throw ValidationError("cosine distance above 2");
  return std::clamp(d, 0.0, 2.0);
}

Rdm empirical_rdm(const CentroidSet& centroids, Metric metric) {
  const std::size_t n = centroids.size();
  Rdm rdm(n, "empirical_" + to_string(metric));
  std::vector<Eigen::VectorXd> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = centroids.vectors.row(static_cast<Eigen::Index>(i));
  if (metric == Metric::cosine) {
    for (const auto& r : rows) {
      if (r.norm() == 0.0) throw DegenerateVector("zero-norm centroid under cosine distance");
    }
  }
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) rdm.entries[k++] = pair_distance(rows[i], rows[j], metric);
  }
  return rdm;
}

Rdm theoretical_rdm(const StimulusSet& stimuli, const TheoreticalRdmSpec& spec) {
  spec.validate();
  if (spec.needs_boundary() && !stimuli.boundary)
    throw DomainError(to_string(spec.kind) + " template requires a category boundary");
  const std::size_t n = stimuli.size();
  const auto& raw = stimuli.values;

  std::vector<double> shifted;
  if (spec.uses_log()) {
    shifted = stimuli.log_domain_values();
    for (std::size_t i = 0; i < n; ++i) {
      if (shifted[i] <= 0.0)
        throw DomainError("log template on non-positive stimulus value " + std::to_string(raw[i]));
    }
  }
  // |ln a - ln b| taken as ln(max / min): the quotient is correctly rounded,
  // so pairs with equal ratios (4:8, 5:10) tie exactly.
  auto log_gap = [&](std::size_t i, std::size_t j) {
    return std::log(std::max(shifted[i], shifted[j]) / std::min(shifted[i], shifted[j]));
  };

  Rdm rdm(n, to_string(spec.kind));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const bool cross = spec.needs_boundary() && stimuli.crosses_boundary(raw[i], raw[j]);
      double d = 0.0;
      switch (spec.kind) {
        case ModelKind::continuous_log: d = log_gap(i, j); break;
        case ModelKind::cp_additive: d = log_gap(i, j) + (cross ? spec.lambda : 0.0); break;
        case ModelKind::cp_multiplicative:
          d = log_gap(i, j) * (1.0 + (cross ? spec.gamma : 0.0));
          break;
        case ModelKind::categorical: d = cross ? 1.0 : 0.0; break;
        case ModelKind::linear: d = std::abs(raw[i] - raw[j]); break;
        case ModelKind::ordinal_continuous: d = static_cast<double>(j - i); break;
      }
      rdm.entries[k] = d;
    }
  }
  return rdm;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.05 * i);
  return grid;
}

LambdaFit fit_lambda(const Rdm& empirical, const StimulusSet& stimuli, std::span<const double> grid) {
  if (grid.empty()) throw DegenerateInput("fit_lambda: empty grid");
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0.0) throw DegenerateInput("fit_lambda: grid values must be >= 0");

  LambdaFit best{sorted.front(), -2.0};
  for (double lambda : sorted) {
    const auto model = theoretical_rdm(stimuli, {ModelKind::cp_additive, lambda, 1.0});
    const double rho = stats::spearman_rho(empirical.entries, model.entries);
    // Strict improvement only, so the smallest maximizing lambda wins.
    if (rho > best.rho + 1e-12) best = {lambda, rho};
  }
  return best;
}

}  // namespace cpgeo
