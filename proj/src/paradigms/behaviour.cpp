#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cpgeo/error.hpp"
#include "cpgeo/paradigms.hpp"

namespace cpgeo::paradigms {

double category_b_probability(const TrialRecord& trial) {
  return fitting::logistic(trial.logit_b - trial.logit_a, 0.0, 1.0);
}

IdentificationResult run_identification(const std::vector<TrialRecord>& trials, double boundary) {
  if (trials.empty()) throw EmptyInput("identification: no trials");

  // framing -> value -> (sum, count) per order
  struct Cell {
    double sum[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
  };
  std::map<std::string, std::map<double, Cell>> grouped;
  for (const auto& t : trials) {
    auto& cell = grouped[t.framing][t.value_a];
    const int o = t.order == PresentationOrder::AB ? 0 : 1;
    cell.sum[o] += category_b_probability(t);
    ++cell.count[o];
  }

  IdentificationResult out;
  double step = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [framing, by_value] : grouped) {
    FramingCurve curve;
    curve.framing = framing;
    for (const auto& [value, cell] : by_value) {
      if (cell.count[0] == 0 || cell.count[1] == 0)
        throw UnbalancedDesign("framing '" + framing + "' value " + std::to_string(value) +
                               " lacks one presentation order");
      const double ab = cell.sum[0] / static_cast<double>(cell.count[0]);
      const double ba = cell.sum[1] / static_cast<double>(cell.count[1]);
      curve.values.push_back(value);
      curve.p_ab.push_back(ab);
      curve.p_ba.push_back(ba);
      curve.p_category_b.push_back(0.5 * (ab + ba));
    }
    if (std::isnan(step)) {
      StimulusSet grid;
      grid.values = curve.values;
      const auto pair = grid.straddling_pair(boundary);
      step = pair ? curve.values[*pair + 1] - curve.values[*pair]
                  : (curve.values.size() > 1 ? curve.values[1] - curve.values[0] : 1.0);
    }
    curve.fit = fitting::fit_sigmoid(curve.values, curve.p_category_b);
    const bool below = std::any_of(curve.p_category_b.begin(), curve.p_category_b.end(), [](double p) { return p < 0.5; });
    const bool above = std::any_of(curve.p_category_b.begin(), curve.p_category_b.end(), [](double p) { return p > 0.5; });
    curve.observed_crossing = below && above;
    curve.boundary_hit = curve.observed_crossing && curve.fit.crossover_defined &&
                         std::abs(curve.fit.crossover - boundary) <= step + 1e-12;
    out.framings.push_back(std::move(curve));
  }
  out.step = step;

  const std::size_t f = out.framings.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.crossover_delta.assign(f, std::vector<double>(f, nan));
  out.crossover_delta_steps.assign(f, std::vector<double>(f, nan));
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = 0; j < f; ++j) {
      const auto& a = out.framings[i];
      const auto& b = out.framings[j];
      const bool defined = a.observed_crossing && a.fit.crossover_defined && b.observed_crossing &&
                           b.fit.crossover_defined;
      if (!defined) continue;
      out.crossover_delta[i][j] = std::abs(a.fit.crossover - b.fit.crossover);
      out.crossover_delta_steps[i][j] = out.crossover_delta[i][j] / step;
    }
  }
  return out;
}

namespace {

GroupComparison compare_groups(const std::vector<double>& cross, const std::vector<double>& within, double alpha) {
  GroupComparison g;
  g.n_cross = cross.size();
  g.n_within = within.size();
  if (cross.empty() || within.empty()) return g;
  g.conf_cross = stats::mean(cross);
  g.conf_within = stats::mean(within);
  g.delta_conf = g.conf_cross - g.conf_within;
  try {
    g.cohens_d = stats::cohens_d(cross, within);
    g.mw_p = stats::mann_whitney_u(cross, within).p_two_sided;
    g.evaluable = true;
    g.significant = g.mw_p < alpha;
  } catch (const DegenerateInput&) {
    g.evaluable = false;
  }
  return g;
}

}  // namespace

DiscriminationResult run_discrimination(std::vector<TrialRecord> trials, double alpha) {
  std::erase_if(trials, [](const TrialRecord& t) { return t.value_a == t.value_b; });
  assign_distance_bins(trials, 6);

  std::vector<double> cross, within;
  std::vector<std::vector<double>> bin_cross(6), bin_within(6);
  for (const auto& t : trials) {
    const auto b = static_cast<std::size_t>(t.distance_bin);
    (t.is_cross_boundary ? cross : within).push_back(t.abs_delta_logit);
    (t.is_cross_boundary ? bin_cross[b] : bin_within[b]).push_back(t.abs_delta_logit);
  }
  if (cross.empty() || within.empty())
    throw DegenerateInput("discrimination needs both cross-boundary and within-category trials");

  DiscriminationResult out;
  out.alpha = alpha;
  out.overall = compare_groups(cross, within, alpha);
  if (!out.overall.evaluable) throw DegenerateInput("discrimination: confidence has no variance");
  for (std::size_t b = 0; b < 6; ++b) {
    out.per_bin.push_back(compare_groups(bin_cross[b], bin_within[b], alpha));
    if (out.per_bin.back().significant) ++out.significant_bins;
  }
  return out;
}

}  // namespace cpgeo::paradigms
