#include "cpgeo/report.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace cpgeo::report {

namespace {

json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(real(v(i)));
  return a;
}

json reals(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

template <typename T>
json by_model(const std::map<ModelKind, T>& m) {
  json o = json::object();
  for (const auto& [k, v] : m) {
    if constexpr (std::is_same_v<T, double>) o[to_string(k)] = real(v);
    else o[to_string(k)] = v;
  }
  return o;
}

std::string fmt_p(double p) { return p < 1e-4 ? fmt::format("{:.1e}", p) : fmt::format("{:.4f}", p); }

}  // namespace

json to_json(const fitting::SigmoidFit& fit) {
  return {{"crossover", real(fit.crossover)}, {"slope", real(fit.slope)},       {"r2", real(fit.r2)},
          {"sse", real(fit.sse)},             {"converged", fit.converged},     {"crossover_defined", fit.crossover_defined}};
}

json to_json(const stats::CorrelationTest& t) {
  return {{"rho", real(t.rho)}, {"p_value", real(t.p_value)}, {"exhaustive", t.exhaustive}};
}

json to_json(const paradigms::RsaRun& run) {
  json layers = json::array();
  for (const auto& r : run.layers) {
    layers.push_back({{"layer", r.layer},
                      {"rho", by_model(r.rho_by_model)},
                      {"mantel_p", by_model(r.mantel_p_by_model)},
                      {"fdr_significant", by_model(r.fdr_significant)},
                      {"cp_advantage", real(r.cp_advantage)},
                      {"add_vs_mult", r.add_vs_mult}});
  }
  return {{"layers", layers},
          {"summary",
           {{"baseline", to_string(run.baseline)},
            {"primary_layers", run.primary_layers},
            {"cp_wins", run.cp_wins},
            {"n_primary", run.primary_layers.size()},
            {"mean_cp_advantage", real(run.mean_cp_advantage)},
            {"add_over_mult", run.add_over_mult},
            {"max_rho", by_model(run.max_rho)}}}};
}

json to_json(const paradigms::H4Run& run) {
  json layers = json::array();
  for (const auto& l : run.layers) {
    const auto& r = l.regression;
    layers.push_back({{"layer", l.layer},           {"r2_step1", real(r.r2_step1)},
                      {"r2_step2", real(r.r2_step2)}, {"delta_r2", real(r.delta_r2)},
                      {"f_stat", real(r.f_stat)},     {"p_value", real(r.p_value)},
                      {"coef_logdist", real(r.coef_logdist)}, {"coef_boundary", real(r.coef_boundary)},
                      {"intercept", real(r.intercept)}, {"n_pairs", r.n_pairs},
                      {"fdr_significant", l.fdr_significant}});
  }
  return {{"layers", layers},
          {"summary",
           {{"primary_layers", run.primary_layers},
            {"significant", run.significant},
            {"n_primary", run.primary_layers.size()},
            {"mean_delta_r2", real(run.mean_delta_r2)},
            {"max_delta_r2", real(run.max_delta_r2)}}}};
}

json to_json(const paradigms::IdentificationResult& result) {
  json framings = json::array();
  for (const auto& f : result.framings) {
    framings.push_back({{"framing", f.framing},
                        {"values", reals(f.values)},
                        {"p_ab", reals(f.p_ab)},
                        {"p_ba", reals(f.p_ba)},
                        {"p_category_b", reals(f.p_category_b)},
                        {"fit", to_json(f.fit)},
                        {"observed_crossing", f.observed_crossing},
                        {"boundary_hit", f.boundary_hit}});
  }
  json delta = json::array(), steps = json::array();
  for (std::size_t i = 0; i < result.crossover_delta.size(); ++i) {
    delta.push_back(reals(result.crossover_delta[i]));
    steps.push_back(reals(result.crossover_delta_steps[i]));
  }
  return {{"framings", framings}, {"crossover_delta", delta}, {"crossover_delta_steps", steps}, {"step", real(result.step)}};
}

json to_json(const paradigms::DiscriminationResult& result) {
  auto group = [](const paradigms::GroupComparison& g) {
    return json{{"n_cross", g.n_cross},         {"n_within", g.n_within},   {"conf_cross", real(g.conf_cross)},
                {"conf_within", real(g.conf_within)}, {"delta_conf", real(g.delta_conf)},
                {"cohens_d", real(g.cohens_d)}, {"mw_p", real(g.mw_p)},     {"evaluable", g.evaluable},
                {"significant", g.significant}};
  };
  json bins = json::array();
  for (const auto& b : result.per_bin) bins.push_back(group(b));
  return {{"overall", group(result.overall)}, {"per_bin", bins}, {"significant_bins", result.significant_bins},
          {"alpha", result.alpha}};
}

json to_json(const std::vector<paradigms::PrecisionLayerResult>& layers) {
  json a = json::array();
  for (const auto& l : layers) {
    a.push_back({{"layer", l.layer},
                 {"adjacent_distances", reals(l.adjacent_distances)},
                 {"precision", reals(l.precision)},
                 {"reference_pair", l.reference_pair},
                 {"boundary_ratio", real(l.boundary_ratio)}});
  }
  return a;
}

json to_json(const std::vector<paradigms::ProbeLayerResult>& layers) {
  json a = json::array();
  for (const auto& l : layers) {
    a.push_back({{"layer", l.probe.layer},
                 {"weights", vec(l.probe.weights)},
                 {"bias", real(l.probe.bias)},
                 {"ridge_penalty", real(l.probe.ridge_penalty)},
                 {"train_accuracy", real(l.probe.train_accuracy)},
                 {"weight_norm", real(l.probe.weight_norm)},
                 {"unit_direction", vec(l.probe.unit_direction)},
                 {"pc1_category_rho", real(l.pc1_category_rho)},
                 {"probe_pc1_cosine", real(l.probe_pc1_cosine)}});
  }
  return a;
}

json to_json(const paradigms::PatchVectorSet& set) {
  json category = json::array(), random = json::array();
  for (std::size_t a = 0; a < set.alpha_levels.size(); ++a) {
    category.push_back(vec(set.category_deltas[a]));
    json controls = json::array();
    for (const auto& r : set.random_deltas[a]) controls.push_back(vec(r));
    random.push_back(controls);
  }
  return {{"layer", set.layer},
          {"hidden_dim", set.unit_direction.size()},
          {"alpha_levels", reals(set.alpha_levels)},
          {"weight_norm", real(set.weight_norm)},
          {"unit_direction", vec(set.unit_direction)},
          {"category_deltas", category},
          {"random_deltas", random},
          {"no_random_controls", set.no_random_controls}};
}

json to_json(const std::vector<paradigms::SpecificityRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) {
    a.push_back({{"layer", r.layer},
                 {"alpha", real(r.alpha)},
                 {"category_effect", real(r.category_effect)},
                 {"mean_random_effect", real(r.mean_random_effect)},
                 {"specificity", real(r.specificity)},
                 {"monotonic", r.monotonic}});
  }
  return a;
}

json to_json(const std::vector<paradigms::RotationLayerResult>& layers) {
  json a = json::array();
  for (const auto& l : layers) {
    a.push_back({{"layer", l.layer},
                 {"boundary_position", l.boundary_position},
                 {"boundary_angle", real(l.boundary_angle)},
                 {"mean_other_angle", real(l.mean_other_angle)},
                 {"max_other_angle", real(l.max_other_angle)},
                 {"n_other", l.n_other}});
  }
  return a;
}

json to_json(const paradigms::LambdaBetaRun& run) {
  json layers = json::array();
  for (const auto& l : run.layers) {
    layers.push_back({{"layer", l.layer}, {"lambda", real(l.lambda)}, {"lambda_rho", real(l.lambda_rho)}, {"beta", real(l.beta)}});
  }
  return {{"layers", layers}, {"correlation", to_json(run.correlation)}};
}

std::string dump(const json& document) { return document.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Human-readable tables

void print_rsa(std::ostream& out, const paradigms::RsaRun& run) {
  if (run.layers.empty()) return;
  fmt::print(out, "{:>5}", "layer");
  for (const auto& [kind, rho] : run.layers.front().rho_by_model) fmt::print(out, " {:>18}", to_string(kind));
  fmt::print(out, " {:>9}\n", "d_rho");
  for (const auto& r : run.layers) {
    fmt::print(out, "{:>5}", r.layer);
    for (const auto& [kind, rho] : r.rho_by_model) {
      const char* mark = r.fdr_significant.at(kind) ? "*" : " ";
      fmt::print(out, " {:>9.4f} p={:<6}{}", rho, fmt_p(r.mantel_p_by_model.at(kind)).substr(0, 6), mark);
    }
    fmt::print(out, " {:>+9.4f}\n", r.cp_advantage);
  }
  fmt::print(out, "CP>Cont {}/{}\n", run.cp_wins, run.primary_layers.size());
  fmt::print(out, "mean d_rho {:+.4f} (baseline {})\n", run.mean_cp_advantage, to_string(run.baseline));
  fmt::print(out, "Add>Mult {}/{}\n", run.add_over_mult, run.primary_layers.size());
}

void print_h4(std::ostream& out, const paradigms::H4Run& run) {
  fmt::print(out, "{:>5} {:>9} {:>9} {:>9} {:>11} {:>10}\n", "layer", "R2_step1", "R2_step2", "dR2", "F", "p");
  for (const auto& l : run.layers) {
    const auto& r = l.regression;
    fmt::print(out, "{:>5} {:>9.4f} {:>9.4f} {:>9.4f} {:>11.3f} {:>10}{}\n", l.layer, r.r2_step1, r.r2_step2,
               r.delta_r2, r.f_stat, fmt_p(r.p_value), l.fdr_significant ? "*" : "");
  }
  fmt::print(out, "Sig layers {}/{}\n", run.significant, run.primary_layers.size());
  fmt::print(out, "mean dR2 {:.4f}  max dR2 {:.4f}\n", run.mean_delta_r2, run.max_delta_r2);
}

void print_identification(std::ostream& out, const paradigms::IdentificationResult& result) {
  fmt::print(out, "{:<24} {:>10} {:>9} {:>7} {:>9}\n", "framing", "crossover", "slope", "R2", "boundary");
  for (const auto& f : result.framings) {
    const std::string crossover =
        f.observed_crossing && f.fit.crossover_defined ? fmt::format("{:.3f}", f.fit.crossover) : "none";
    fmt::print(out, "{:<24} {:>10} {:>9.3f} {:>7.3f} {:>9}\n", f.framing.empty() ? "(default)" : f.framing,
               crossover, f.fit.slope, f.fit.r2, f.boundary_hit ? "yes" : "no");
  }
}

void print_discrimination(std::ostream& out, const paradigms::DiscriminationResult& result) {
  const auto& o = result.overall;
  fmt::print(out, "conf cross {:.4f}  within {:.4f}  d_conf {:+.4f}  d {:.3f}  MW p {}\n", o.conf_cross,
             o.conf_within, o.delta_conf, o.cohens_d, fmt_p(o.mw_p));
  for (std::size_t b = 0; b < result.per_bin.size(); ++b) {
    const auto& g = result.per_bin[b];
    if (!g.evaluable) {
      fmt::print(out, "bin {}: n/a (cross {}, within {})\n", b + 1, g.n_cross, g.n_within);
      continue;
    }
    fmt::print(out, "bin {}: d_conf {:+.4f}  d {:.3f}  p {}{}\n", b + 1, g.delta_conf, g.cohens_d, fmt_p(g.mw_p),
               g.significant ? " *" : "");
  }
  fmt::print(out, "Sig levels {}/6\n", result.significant_bins);
}

void print_precision(std::ostream& out, const std::vector<paradigms::PrecisionLayerResult>& layers) {
  for (const auto& l : layers) fmt::print(out, "layer {:>3}: boundary ratio {:.3f} (pair {})\n", l.layer, l.boundary_ratio, l.reference_pair);
}

void print_probe(std::ostream& out, const std::vector<paradigms::ProbeLayerResult>& layers) {
  for (const auto& l : layers) {
    fmt::print(out, "layer {:>3}: accuracy {:.2f}  |w| {:.4f}  PC1-category |rho| {:.3f}  |cos(probe, PC1)| {:.3f}\n",
               l.probe.layer, l.probe.train_accuracy, l.probe.weight_norm, l.pc1_category_rho, l.probe_pc1_cosine);
  }
}

void print_rotation(std::ostream& out, const std::vector<paradigms::RotationLayerResult>& layers) {
  for (const auto& l : layers) {
    fmt::print(out, "layer {:>3}: boundary {:.1f} deg  elsewhere mean {:.1f} max {:.1f} deg\n", l.layer,
               l.boundary_angle, l.mean_other_angle, l.max_other_angle);
  }
}

void print_lambda_beta(std::ostream& out, const paradigms::LambdaBetaRun& run) {
  for (const auto& l : run.layers) fmt::print(out, "layer {:>3}: lambda* {:.2f}  beta {:.4f}\n", l.layer, l.lambda, l.beta);
  fmt::print(out, "lambda-beta rho {:+.3f}  p {}\n", run.correlation.rho, fmt_p(run.correlation.p_value));
}

}  // namespace cpgeo::report
