#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpgeo/error.hpp"
#include "cpgeo/paradigms.hpp"
#include "cpgeo/parallel.hpp"
#include "cpgeo/rng.hpp"

namespace cpgeo::paradigms {

StimulusSet analysis_stimuli(const StimulusSet& stimuli) {
  if (stimuli.boundary || !stimuli.control_position) return stimuli;
  StimulusSet copy = stimuli;
  copy.boundary = stimuli.control_position;
  return copy;
}

std::vector<std::size_t> resolve_layers(const HiddenStateBundle& bundle,
                                        const std::vector<std::size_t>& requested) {
  if (requested.empty()) {
    std::vector<std::size_t> all(bundle.n_layers);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  for (auto l : requested) {
    if (l >= bundle.n_layers)
      throw IndexError("layer " + std::to_string(l) + " out of range (bundle has " +
                       std::to_string(bundle.n_layers) + ")");
  }
  return requested;
}

std::vector<std::size_t> default_primary_layers(std::size_t n_layers) {
  std::vector<std::size_t> out;
  for (std::size_t l = n_layers > 1 ? 1 : 0; l < n_layers; ++l) out.push_back(l);
  return out;
}

namespace {

std::vector<std::size_t> primary_subset(const std::vector<std::size_t>& analysed,
                                        const std::vector<std::size_t>& requested, std::size_t n_layers) {
  const auto wanted = requested.empty() ? default_primary_layers(n_layers) : requested;
  std::vector<std::size_t> out;
  for (auto l : analysed) {
    if (std::find(wanted.begin(), wanted.end(), l) != wanted.end()) out.push_back(l);
  }
  return out;
}

bool contains(const std::vector<std::size_t>& v, std::size_t x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

std::vector<TheoreticalRdmSpec> default_model_specs(DomainKind domain, double lambda, double gamma) {
  std::vector<TheoreticalRdmSpec> specs;
  if (domain == DomainKind::nonce) specs.push_back({ModelKind::ordinal_continuous, lambda, gamma});
  specs.push_back({ModelKind::continuous_log, lambda, gamma});
  specs.push_back({ModelKind::cp_additive, lambda, gamma});
  specs.push_back({ModelKind::cp_multiplicative, lambda, gamma});
  specs.push_back({ModelKind::categorical, lambda, gamma});
  specs.push_back({ModelKind::linear, lambda, gamma});
  return specs;
}

ModelKind default_baseline(DomainKind domain) {
  return domain == DomainKind::nonce ? ModelKind::ordinal_continuous : ModelKind::continuous_log;
}

RsaRun run_rsa(const HiddenStateBundle& bundle, const RsaOptions& options) {
  const StimulusSet stimuli = analysis_stimuli(bundle.stimuli);
  const auto specs = options.specs.empty()
                         ? default_model_specs(stimuli.domain, options.lambda, options.gamma)
                         : options.specs;
  const ModelKind baseline = options.baseline.value_or(default_baseline(stimuli.domain));
  auto has_kind = [&](ModelKind k) {
    return std::any_of(specs.begin(), specs.end(), [k](const auto& s) { return s.kind == k; });
  };
  if (specs.size() < 2 || !has_kind(ModelKind::cp_additive) || !has_kind(baseline))
    throw ConfigError("rsa needs cp_additive and the " + to_string(baseline) + " baseline among its models");

  std::vector<Rdm> templates;
  templates.reserve(specs.size());
  for (const auto& s : specs) templates.push_back(theoretical_rdm(stimuli, s));

  const auto layers = resolve_layers(bundle, options.layers);
  RsaRun run;
  run.baseline = baseline;
  run.layers.resize(layers.size());

  parallel_for(layers.size(), options.workers, [&](std::size_t idx) {
    const std::size_t layer = layers[idx];
    const auto empirical = empirical_rdm(compute_centroids(bundle, layer), options.metric);
    RsaLayerResult& r = run.layers[idx];
    r.layer = layer;
    const auto layer_seed = layer_substream(options.seed, layer);
    for (std::size_t m = 0; m < specs.size(); ++m) {
      const auto mantel = stats::mantel_test(empirical, templates[m], options.permutations, layer_seed);
      r.rho_by_model[specs[m].kind] = mantel.rho_observed;
      r.mantel_p_by_model[specs[m].kind] = mantel.p_value;
    }
    r.cp_advantage = r.rho_by_model.at(ModelKind::cp_additive) - r.rho_by_model.at(baseline);
    if (r.rho_by_model.contains(ModelKind::cp_multiplicative))
      r.add_vs_mult = r.rho_by_model.at(ModelKind::cp_additive) > r.rho_by_model.at(ModelKind::cp_multiplicative);
  });

  // BH-FDR across analysed layers, separately per model.
  for (const auto& s : specs) {
    std::vector<double> ps;
    for (const auto& r : run.layers) ps.push_back(r.mantel_p_by_model.at(s.kind));
    const auto fdr = stats::bh_fdr(ps, options.fdr_alpha);
    for (std::size_t i = 0; i < run.layers.size(); ++i) run.layers[i].fdr_significant[s.kind] = fdr.rejected[i];
  }

  run.primary_layers = primary_subset(layers, options.primary_layers, bundle.n_layers);
  double sum = 0.0;
  for (const auto& r : run.layers) {
    for (const auto& [kind, rho] : r.rho_by_model) {
      auto it = run.max_rho.find(kind);
      if (it == run.max_rho.end() || rho > it->second) run.max_rho[kind] = rho;
    }
    if (!contains(run.primary_layers, r.layer)) continue;
    sum += r.cp_advantage;
    if (r.cp_advantage > 0.0) ++run.cp_wins;
    if (r.add_vs_mult) ++run.add_over_mult;
  }
  if (!run.primary_layers.empty()) run.mean_cp_advantage = sum / static_cast<double>(run.primary_layers.size());
  return run;
}

PairTable pair_table(const Rdm& empirical, const StimulusSet& stimuli) {
  if (empirical.n != stimuli.size()) throw ValidationError("rdm and stimulus set sizes differ");
  auto logs = stimuli.log_domain_values();
  for (double& v : logs) v = std::log(v);
  PairTable t;
  std::size_t k = 0;
  for (std::size_t i = 0; i < stimuli.size(); ++i) {
    for (std::size_t j = i + 1; j < stimuli.size(); ++j, ++k) {
      t.distances.push_back(empirical.entries[k]);
      t.log_distances.push_back(std::abs(logs[i] - logs[j]));
      t.cross.push_back(stimuli.crosses_boundary(stimuli.values[i], stimuli.values[j]));
    }
  }
  return t;
}

H4Run run_h4(const HiddenStateBundle& bundle, Metric metric, const std::vector<std::size_t>& layers_requested,
             const std::vector<std::size_t>& primary_layers, double fdr_alpha, unsigned workers) {
  const StimulusSet stimuli = analysis_stimuli(bundle.stimuli);
  if (!stimuli.boundary) throw DomainError("h4 requires a boundary (or control position)");
  const auto layers = resolve_layers(bundle, layers_requested);
  H4Run run;
  run.layers.resize(layers.size());
  parallel_for(layers.size(), workers, [&](std::size_t idx) {
    const auto empirical = empirical_rdm(compute_centroids(bundle, layers[idx]), metric);
    const auto table = pair_table(empirical, stimuli);
    run.layers[idx].layer = layers[idx];
    run.layers[idx].regression = fitting::hierarchical_regression(table.distances, table.log_distances, table.cross);
  });
  std::vector<double> ps;
  for (const auto& r : run.layers) ps.push_back(r.regression.p_value);
  const auto fdr = stats::bh_fdr(ps, fdr_alpha);
  for (std::size_t i = 0; i < run.layers.size(); ++i) run.layers[i].fdr_significant = fdr.rejected[i];

  run.primary_layers = primary_subset(layers, primary_layers, bundle.n_layers);
  double sum = 0.0;
  for (const auto& r : run.layers) {
    if (!contains(run.primary_layers, r.layer)) continue;
    sum += r.regression.delta_r2;
    run.max_delta_r2 = std::max(run.max_delta_r2, r.regression.delta_r2);
    if (r.fdr_significant) ++run.significant;
  }
  if (!run.primary_layers.empty()) run.mean_delta_r2 = sum / static_cast<double>(run.primary_layers.size());
  return run;
}

LambdaBetaRun run_lambda_beta(const HiddenStateBundle& bundle, Metric metric, std::span<const double> grid,
                              const std::vector<std::size_t>& layers_requested, std::size_t permutations,
                              std::uint64_t seed, unsigned workers) {
  const StimulusSet stimuli = analysis_stimuli(bundle.stimuli);
  const auto layers = resolve_layers(bundle, layers_requested);
  const auto continuous = theoretical_rdm(stimuli, {ModelKind::continuous_log, 0.0, 0.0});
  LambdaBetaRun run;
  run.layers.resize(layers.size());
  parallel_for(layers.size(), workers, [&](std::size_t idx) {
    const auto empirical = empirical_rdm(compute_centroids(bundle, layers[idx]), metric);
    const auto fit = fit_lambda(empirical, stimuli, grid);
    run.layers[idx] = {layers[idx], fit.lambda, fit.rho, stats::spearman_rho(empirical.entries, continuous.entries)};
  });
  std::vector<double> lambdas, betas;
  for (const auto& l : run.layers) {
    lambdas.push_back(l.lambda);
    betas.push_back(l.beta);
  }
  run.correlation = lambda_beta_correlation(lambdas, betas, permutations, seed);
  return run;
}

stats::CorrelationTest lambda_beta_correlation(std::span<const double> lambdas, std::span<const double> betas,
                                               std::size_t permutations, std::uint64_t seed) {
  if (lambdas.size() != betas.size()) throw DegenerateInput("lambda/beta length mismatch");
  if (lambdas.size() < 4) throw TooFewItems("lambda-beta correlation needs at least 4 layers");
  return stats::spearman_permutation_test(lambdas, betas, permutations, seed);
}

stats::CorrelationTest cross_model_dissociation(const std::vector<ModelSummary>& summaries,
                                                std::size_t permutations, std::uint64_t seed) {
  if (summaries.size() < 4) throw TooFewItems("cross-model dissociation needs at least 4 models");
  std::vector<double> slopes, strengths;
  for (const auto& s : summaries) {
    slopes.push_back(s.identification_slope);
    strengths.push_back(s.cp_strength);
  }
  return stats::spearman_permutation_test(slopes, strengths, permutations, seed);
}

double boundary_ratio_e4(double decade10_mean_advantage, double decade100_mean_advantage) {
  if (decade10_mean_advantage == 0.0) throw DegenerateInput("decade-10 advantage is zero");
  return decade100_mean_advantage / decade10_mean_advantage;
}

}  // namespace cpgeo::paradigms
