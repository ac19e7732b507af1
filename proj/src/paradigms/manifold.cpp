#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "cpgeo/error.hpp"
#include "cpgeo/paradigms.hpp"
#include "cpgeo/rng.hpp"

namespace cpgeo::paradigms {

// ---------------------------------------------------------------------------
// Precision gradient

std::size_t reference_pair(const StimulusSet& stimuli) {
  if (stimuli.boundary) {
    if (auto p = stimuli.straddling_pair(*stimuli.boundary)) return *p;
  }
  if (stimuli.control_position) {
    if (auto p = stimuli.straddling_pair(*stimuli.control_position)) return *p;
  }
  return (stimuli.size() - 2) / 2;
}

std::vector<double> adjacent_distances(const CentroidSet& centroids, Metric metric) {
  std::vector<double> d;
  for (Eigen::Index i = 0; i + 1 < centroids.vectors.rows(); ++i)
    d.push_back(pair_distance(centroids.vectors.row(i).transpose(), centroids.vectors.row(i + 1).transpose(), metric));
  return d;
}

PrecisionLayerResult precision_gradient(const CentroidSet& centroids, const StimulusSet& stimuli, Metric metric) {
  if (stimuli.size() < 3) throw TooFewItems("precision gradient needs at least 3 stimuli");
  if (centroids.size() != stimuli.size()) throw ValidationError("centroid and stimulus counts differ");
  PrecisionLayerResult r;
  r.layer = centroids.layer;
  r.adjacent_distances = adjacent_distances(centroids, metric);
  for (double d : r.adjacent_distances) {
    if (d <= 0.0) throw DegenerateVector("adjacent centroids coincide (infinite precision)");
    r.precision.push_back(1.0 / d);
  }
  r.reference_pair = reference_pair(stimuli);
  double other = 0.0;
  for (std::size_t i = 0; i < r.adjacent_distances.size(); ++i) {
    if (i != r.reference_pair) other += r.adjacent_distances[i];
  }
  other /= static_cast<double>(r.adjacent_distances.size() - 1);
  r.boundary_ratio = r.adjacent_distances[r.reference_pair] / other;
  return r;
}

std::vector<PrecisionLayerResult> run_precision(const HiddenStateBundle& bundle, Metric metric,
                                                const std::vector<std::size_t>& layers) {
  std::vector<PrecisionLayerResult> out;
  for (auto l : resolve_layers(bundle, layers))
    out.push_back(precision_gradient(compute_centroids(bundle, l), bundle.stimuli, metric));
  return out;
}

// ---------------------------------------------------------------------------
// Probe and patch vectors

ProbeLayerResult probe_layer(const CentroidSet& centroids, const StimulusSet& stimuli, double penalty) {
  const StimulusSet s = analysis_stimuli(stimuli);
  if (!s.boundary) throw DomainError("probe needs a category boundary");
  std::vector<bool> labels;
  std::vector<double> category;
  for (double v : s.values) {
    labels.push_back(s.category_of(v) == 1);
    category.push_back(s.category_of(v));
  }
  ProbeLayerResult out;
  out.probe = fitting::ridge_probe(centroids, labels, penalty);
  const Eigen::VectorXd pc1 = fitting::top_principal_component(centroids.vectors);
  const Eigen::VectorXd scores = centroids.vectors * pc1;
  const std::vector<double> sv(scores.data(), scores.data() + scores.size());
  out.pc1_category_rho = std::abs(stats::spearman_rho(sv, category));
  out.probe_pc1_cosine = std::abs(out.probe.unit_direction.dot(pc1));
  return out;
}

std::vector<ProbeLayerResult> run_probe(const HiddenStateBundle& bundle, const std::vector<std::size_t>& layers,
                                        double penalty) {
  std::vector<ProbeLayerResult> out;
  for (auto l : resolve_layers(bundle, layers)) out.push_back(probe_layer(compute_centroids(bundle, l), bundle.stimuli, penalty));
  return out;
}

PatchVectorSet build_patch_vectors(const fitting::ProbeResult& probe, const std::vector<double>& alphas,
                                   std::size_t n_random, std::uint64_t seed) {
  if (!(probe.weight_norm > 0.0) || probe.unit_direction.size() == 0)
    throw ValidationError("patch vectors need a fitted probe");
  PatchVectorSet set;
  set.layer = probe.layer;
  set.alpha_levels = alphas;
  set.weight_norm = probe.weight_norm;
  set.unit_direction = probe.unit_direction;
  set.no_random_controls = n_random == 0;

  // Random directions are shared across doses so each control traces its own dose-response.
  const auto dim = probe.unit_direction.size();
  std::vector<Eigen::VectorXd> directions;
  for (std::size_t r = 0; r < n_random; ++r) {
    CounterRng rng(layer_substream(seed, probe.layer), r);
    Eigen::VectorXd v(dim);
    do {
      for (Eigen::Index k = 0; k < dim; ++k) v(k) = rng.gaussian();
    } while (v.norm() == 0.0);
    directions.push_back(v.normalized());
  }
  for (double alpha : alphas) {
    const double norm = alpha * probe.weight_norm;
    set.category_deltas.push_back(norm * probe.unit_direction);
    std::vector<Eigen::VectorXd> controls;
    for (const auto& d : directions) controls.push_back(norm * d);
    set.random_deltas.push_back(std::move(controls));
  }
  return set;
}

double specificity_ratio(double cat_effect, std::span<const double> random_effects) {
  if (random_effects.empty()) throw EmptyInput("specificity_ratio: no random controls");
  double sum = 0.0;
  for (double r : random_effects) sum += std::abs(r);
  const double m = sum / static_cast<double>(random_effects.size());
  if (m <= 0.0) throw DegenerateInput("specificity_ratio: mean random effect is zero");
  return std::abs(cat_effect) / m;
}

std::vector<PatchEffect> read_patch_effects(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open patch effects file " + path);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("patch effects file is empty");
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
  auto split = [delim](const std::string& row) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(row);
    while (std::getline(ss, cell, delim)) {
      cell.erase(0, cell.find_first_not_of(" \r"));
      cell.erase(cell.find_last_not_of(" \r") + 1);
      cells.push_back(cell);
    }
    return cells;
  };
  const auto header = split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : {"layer", "alpha", "direction", "delta_conf"}) {
    if (!col.contains(name)) throw SchemaError(std::string("patch effects file lacks column '") + name + "'");
  }
  auto number = [](const std::string& s, std::size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      throw ParseError("patch effects line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
  };
  std::vector<PatchEffect> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() < header.size()) throw ParseError("patch effects line " + std::to_string(line_no) + " is short");
    PatchEffect e;
    e.layer = static_cast<std::size_t>(number(cells[col["layer"]], line_no));
    e.alpha = number(cells[col["alpha"]], line_no);
    e.direction = cells[col["direction"]];
    e.delta_conf = number(cells[col["delta_conf"]], line_no);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<SpecificityRow> analyze_patch_effects(const std::vector<PatchEffect>& effects) {
  struct Acc {
    std::optional<double> category;
    std::vector<double> random;
  };
  std::map<std::size_t, std::map<double, Acc>> grouped;
  for (const auto& e : effects) {
    auto& acc = grouped[e.layer][e.alpha];
    if (e.direction == "category") acc.category = e.delta_conf;
    else if (e.direction.rfind("random", 0) == 0) acc.random.push_back(e.delta_conf);
    else throw SchemaError("unknown patch direction '" + e.direction + "'");
  }
  std::vector<SpecificityRow> rows;
  for (const auto& [layer, by_alpha] : grouped) {
    bool monotonic = true;
    double previous = -1.0;
    const std::size_t first = rows.size();
    for (const auto& [alpha, acc] : by_alpha) {
      if (!acc.category) throw SchemaError("layer " + std::to_string(layer) + " lacks a category row");
      SpecificityRow row;
      row.layer = layer;
      row.alpha = alpha;
      row.category_effect = *acc.category;
      double sum = 0.0;
      for (double r : acc.random) sum += std::abs(r);
      row.mean_random_effect = acc.random.empty() ? 0.0 : sum / static_cast<double>(acc.random.size());
      row.specificity = specificity_ratio(row.category_effect, acc.random);
      if (std::abs(row.category_effect) < previous) monotonic = false;
      previous = std::abs(row.category_effect);
      rows.push_back(row);
    }
    for (std::size_t i = first; i < rows.size(); ++i) rows[i].monotonic = monotonic;
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Local manifold

double manifold_rotation(const CentroidSet& centroids, std::size_t window, std::size_t position) {
  const auto n = centroids.size();
  if (window < 2) throw DegenerateInput("manifold_rotation: window must be >= 2");
  if (position < window || position + window >= n)
    throw DegenerateInput("manifold_rotation: window does not fit around position " + std::to_string(position));
  const auto w = static_cast<Eigen::Index>(window);
  const auto p = static_cast<Eigen::Index>(position);
  const Eigen::VectorXd before = fitting::top_principal_component(centroids.vectors.middleRows(p - w, w + 1));
  const Eigen::VectorXd after = fitting::top_principal_component(centroids.vectors.middleRows(p, w + 1));
  const double c = std::clamp(std::abs(before.dot(after)), 0.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

std::vector<RotationLayerResult> run_rotation(const HiddenStateBundle& bundle, std::size_t window,
                                              const std::vector<std::size_t>& layers) {
  const StimulusSet s = analysis_stimuli(bundle.stimuli);
  if (!s.boundary) throw DomainError("rotation analysis needs a boundary or control position");
  const auto step = s.straddling_pair(*s.boundary);
  if (!step) throw DomainError("boundary does not fall between two stimuli");
  const std::size_t position = *step + 1;  // first stimulus at or above the boundary
  const std::size_t n = s.size();
  if (position < window || position + window >= n)
    throw DegenerateInput("rotation window does not fit around the boundary");

  std::vector<RotationLayerResult> out;
  for (auto l : resolve_layers(bundle, layers)) {
    const auto c = compute_centroids(bundle, l);
    RotationLayerResult r;
    r.layer = l;
    r.boundary_position = position;
    r.boundary_angle = manifold_rotation(c, window, position);
    double sum = 0.0;
    for (std::size_t p = window; p + window < n; ++p) {
      // Skip positions whose windows contain the boundary step (*step, *step + 1).
      if (p - window <= *step && *step + 1 <= p + window) continue;
      const double a = manifold_rotation(c, window, p);
      sum += a;
      r.max_other_angle = std::max(r.max_other_angle, a);
      ++r.n_other;
    }
    if (r.n_other > 0) r.mean_other_angle = sum / static_cast<double>(r.n_other);
    out.push_back(r);
  }
  return out;
}

PhaseResetResult phase_reset(const CentroidSet& centroids, const StimulusSet& stimuli, Metric metric,
                             std::size_t window) {
  const StimulusSet s = analysis_stimuli(stimuli);
  if (!s.boundary) throw DomainError("phase reset needs a boundary");
  const auto step = s.straddling_pair(*s.boundary);
  if (!step) throw DomainError("boundary does not fall between two stimuli");
  const auto d = adjacent_distances(centroids, metric);
  std::vector<double> near, far;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::size_t gap = i > *step ? i - *step : *step - i;
    (gap <= window ? near : far).push_back(d[i]);
  }
  if (near.size() < 3 || far.size() < 3)
    throw DegenerateInput("phase reset needs at least 3 adjacent steps in each group");
  PhaseResetResult r;
  r.n_boundary = near.size();
  r.n_other = far.size();
  const double far_mean = stats::mean(far);
  if (far_mean <= 0.0) throw DegenerateVector("non-boundary steps have zero length");
  r.boundary_to_nonboundary_ratio = stats::mean(near) / far_mean;
  try {
    r.mw_p = stats::mann_whitney_u(near, far).p_two_sided;
  } catch (const DegenerateInput&) {
    r.mw_p = 1.0;  // every step identical
  }
  return r;
}

}  // namespace cpgeo::paradigms
