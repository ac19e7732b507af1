#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpgeo/data_model.hpp"

namespace cpgeo {

enum class Metric { cosine, euclidean };

std::string to_string(Metric metric);
Metric metric_from_string(const std::string& name);

enum class ModelKind {
  continuous_log,
  cp_additive,
  cp_multiplicative,
  categorical,
  linear,
  ordinal_continuous,
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct TheoreticalRdmSpec {
  ModelKind kind = ModelKind::continuous_log;
  double lambda = 1.0;  // additive cross-category boost
  double gamma = 1.0;   // multiplicative cross-category boost

  bool needs_boundary() const noexcept {
    return kind == ModelKind::cp_additive || kind == ModelKind::cp_multiplicative ||
           kind == ModelKind::categorical;
  }
  bool uses_log() const noexcept {
    return kind == ModelKind::continuous_log || kind == ModelKind::cp_additive ||
           kind == ModelKind::cp_multiplicative;
  }
  void validate() const;
};

// Per-stimulus mean over sentences at one layer; rows are stimuli.
struct CentroidSet {
  std::size_t layer = 0;
  Eigen::MatrixXd vectors;

  std::size_t size() const noexcept { return static_cast<std::size_t>(vectors.rows()); }
};

CentroidSet compute_centroids(const HiddenStateBundle& bundle, std::size_t layer);

// cosine: 1 - u.v / (|u||v|) clamped to [0, 2]; euclidean: |u - v|.
Rdm empirical_rdm(const CentroidSet& centroids, Metric metric);

double pair_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v, Metric metric);

// Natural-log templates; temperature sets are shifted to v - v_min + 1 first.
Rdm theoretical_rdm(const StimulusSet& stimuli, const TheoreticalRdmSpec& spec);

struct LambdaFit {
  double lambda = 0.0;
  double rho = 0.0;
};

// 0.00, 0.05, ..., 2.00
std::vector<double> default_lambda_grid();

// Grid value maximizing Spearman rho against the cp_additive template; ties go to the smaller lambda.
LambdaFit fit_lambda(const Rdm& empirical, const StimulusSet& stimuli, std::span<const double> grid);

}  // namespace cpgeo
