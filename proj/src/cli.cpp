#include "cpgeo/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cpgeo/error.hpp"
#include "cpgeo/io_util.hpp"
#include "cpgeo/paradigms.hpp"
#include "cpgeo/report.hpp"
#include "cpgeo/synth.hpp"

namespace cpgeo::cli {

using nlohmann::json;

namespace {

long parse_int(const std::string& s, const std::string& what) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("bad " + what + " '" + s + "'");
  return v;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("bad " + what + " '" + s + "'");
  return v;
}

json optional_real(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::vector<std::size_t> parse_layer_range(const std::string& text) {
  if (text.empty()) return {};
  const auto dots = text.find("..");
  const long lo = parse_int(dots == std::string::npos ? text : text.substr(0, dots), "layer range");
  const long hi = dots == std::string::npos ? lo : parse_int(text.substr(dots + 2), "layer range");
  if (lo < 0 || hi < lo) throw ConfigError("bad layer range '" + text + "'");
  std::vector<std::size_t> out;
  for (long l = lo; l <= hi; ++l) out.push_back(static_cast<std::size_t>(l));
  return out;
}

std::vector<double> parse_values(const std::string& text) {
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const long lo = parse_int(text.substr(0, dots), "value range");
    const long hi = parse_int(text.substr(dots + 2), "value range");
    if (hi < lo) throw ConfigError("bad value range '" + text + "'");
    return synth::integer_range(static_cast<int>(lo), static_cast<int>(hi));
  }
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, "stimulus value"));
  return out;
}

json config_to_json(const RunConfig& c) {
  return {{"command", c.command},
          {"inputs", c.inputs},
          {"trials", c.trials},
          {"out", c.out},
          {"seed", c.seed},
          {"permutations", c.permutations},
          {"metric", c.metric},
          {"fdr_alpha", c.fdr_alpha},
          {"lambda", c.lambda},
          {"gamma", c.gamma},
          {"layers", c.layers.empty() ? json("all") : json(c.layers)},
          {"primary_layers", c.primary_layers.empty() ? json("non-embedding") : json(c.primary_layers)},
          {"boundary", optional_real(c.boundary)},
          {"ridge_penalty", c.ridge_penalty},
          {"alphas", c.alphas},
          {"n_random", c.n_random},
          {"rotation_window", c.rotation_window},
          {"phase_window", c.phase_window},
          {"synth",
           {{"layers", c.synth_layers},
            {"sentences", c.synth_sentences},
            {"dim", c.synth_dim},
            {"radius", c.synth_radius},
            {"arc_span", c.synth_arc_span},
            {"planted_lambda", c.synth_lambda},
            {"noise", c.synth_noise},
            {"values", c.synth_values},
            {"control_position", optional_real(c.synth_control)},
            {"condition", c.synth_condition},
            {"domain", c.synth_domain},
            {"model_id", c.synth_model}}}};
}

namespace {

struct Context {
  const RunConfig& config;
  std::ostream& out;
  std::ostream& err;
  json provenance = json::array();
  json metadata = json::object();

  HiddenStateBundle load_bundle() {
    if (config.inputs.size() != 1) throw ConfigError(config.command + " takes exactly one --input bundle");
    const auto& path = config.inputs.front();
    if (!std::filesystem::exists(path)) throw IoError("input file " + path + " does not exist");
    auto bundle = read_bundle(path);
    provenance.push_back({{"path", path}, {"sha256", sha256_file(path)}, {"kind", "bundle"}});
    metadata["model_id"] = bundle.model_id;
    metadata["condition"] = bundle.stimuli.condition;
    metadata["domain"] = to_string(bundle.stimuli.domain);
    metadata["log_shift_applied"] = bundle.stimuli.needs_log_shift();
    metadata["token_position"] = bundle.token_position;
    return bundle;
  }

  std::vector<TrialRecord> load_trials(const std::optional<double>& boundary) {
    if (config.trials.empty()) throw ConfigError(config.command + " needs --trials");
    if (!std::filesystem::exists(config.trials)) throw IoError("trials file " + config.trials + " does not exist");
    auto trials = read_trials(config.trials, boundary);
    provenance.push_back({{"path", config.trials}, {"sha256", sha256_file(config.trials)}, {"kind", "trials"}});
    return trials;
  }

  double require_boundary() const {
    if (!config.boundary) throw ConfigError(config.command + " needs --boundary");
    return *config.boundary;
  }

  Metric metric() const { return metric_from_string(config.metric); }
  std::vector<std::size_t> layers() const { return parse_layer_range(config.layers); }
  std::vector<std::size_t> primary() const { return parse_layer_range(config.primary_layers); }

  paradigms::RsaOptions rsa_options() const {
    paradigms::RsaOptions o;
    o.metric = metric();
    o.permutations = config.permutations;
    o.seed = config.seed;
    o.fdr_alpha = config.fdr_alpha;
    o.lambda = config.lambda;
    o.gamma = config.gamma;
    o.layers = layers();
    o.primary_layers = primary();
    o.workers = config.workers;
    return o;
  }

  void emit(const json& results) {
    if (config.out.empty()) return;
    json doc;
    doc["command"] = config.command;
    doc["config"] = config_to_json(config);
    doc["metadata"] = metadata;
    doc["provenance"] = {{"inputs", provenance}};
    doc["results"] = results;
    write_file_atomic(config.out, report::dump(doc));
  }
};

void run_synth(Context& ctx) {
  const auto& c = ctx.config;
  if (c.out.empty()) throw ConfigError("synth needs --out for the bundle file");
  synth::SynthSpec spec;
  spec.stimuli.condition = c.synth_condition;
  spec.stimuli.domain = domain_kind_from_string(c.synth_domain);
  spec.stimuli.values = parse_values(c.synth_values);
  spec.stimuli.boundary = c.boundary;
  spec.stimuli.control_position = c.synth_control;
  spec.n_layers = c.synth_layers;
  spec.n_sentences = c.synth_sentences;
  spec.dim = c.synth_dim;
  spec.radius = c.synth_radius;
  spec.arc_span = c.synth_arc_span;
  spec.lambda_true = c.synth_lambda;
  spec.noise_sigma = c.synth_noise;
  spec.seed = c.seed;
  spec.model_id = c.synth_model;
  const auto bundle = synth::generate(spec, c.workers);
  write_bundle(bundle, c.out);
  fmt::print(ctx.out, "wrote {} (L={} N={} S={} D={})\n", c.out, bundle.n_layers, bundle.n_stimuli(),
             bundle.n_sentences, bundle.hidden_dim);
}

void run_rsa_command(Context& ctx, bool ordinal_baseline) {
  const auto bundle = ctx.load_bundle();
  auto options = ctx.rsa_options();
  if (ordinal_baseline) {
    options.baseline = ModelKind::ordinal_continuous;
    options.specs = paradigms::default_model_specs(DomainKind::nonce, options.lambda, options.gamma);
  }
  fmt::print(ctx.err, "{}: {} layers, {} permutations per model\n", ctx.config.command,
             paradigms::resolve_layers(bundle, options.layers).size(), options.permutations);
  const auto run = paradigms::run_rsa(bundle, options);
  ctx.metadata["mantel_alternative"] = "one-sided (positive association)";
  ctx.metadata["mantel_statistic"] = "spearman";
  ctx.metadata["lambda_template"] = options.lambda;
  ctx.metadata["gamma_template"] = options.gamma;
  report::print_rsa(ctx.out, run);
  ctx.emit(report::to_json(run));
}

void run_h4_command(Context& ctx) {
  const auto bundle = ctx.load_bundle();
  const auto run = paradigms::run_h4(bundle, ctx.metric(), ctx.layers(), ctx.primary(), ctx.config.fdr_alpha,
                                     ctx.config.workers);
  ctx.metadata["f_test_dof"] = "1, n - 3";
  report::print_h4(ctx.out, run);
  ctx.emit(report::to_json(run));
}

void run_identify(Context& ctx) {
  const double boundary = ctx.require_boundary();
  const auto result = paradigms::run_identification(ctx.load_trials(boundary), boundary);
  ctx.metadata["sigmoid"] = "2-parameter logistic, asymptotes 0/1";
  report::print_identification(ctx.out, result);
  ctx.emit(report::to_json(result));
}

void run_discrim(Context& ctx) {
  const double boundary = ctx.require_boundary();
  const auto result = paradigms::run_discrimination(ctx.load_trials(boundary), ctx.config.fdr_alpha);
  ctx.metadata["distance_bins"] = "6 equal-count bins over log distance";
  report::print_discrimination(ctx.out, result);
  ctx.emit(report::to_json(result));
}

void run_precision_command(Context& ctx) {
  const auto bundle = ctx.load_bundle();
  const auto layers = paradigms::run_precision(bundle, ctx.metric(), ctx.layers());
  report::print_precision(ctx.out, layers);
  ctx.emit({{"layers", report::to_json(layers)}});
}

void run_probe_command(Context& ctx) {
  const auto bundle = ctx.load_bundle();
  const auto layers = paradigms::run_probe(bundle, ctx.layers(), ctx.config.ridge_penalty);
  ctx.metadata["ridge_penalty"] = ctx.config.ridge_penalty;
  ctx.metadata["probe_features"] = "centered and standardized per dimension";
  ctx.metadata["probe_accuracy"] = "training centroids";
  report::print_probe(ctx.out, layers);
  ctx.emit({{"layers", report::to_json(layers)}});
}

void run_patch_vectors(Context& ctx) {
  const auto bundle = ctx.load_bundle();
  const auto probes = paradigms::run_probe(bundle, ctx.layers(), ctx.config.ridge_penalty);
  json sets = json::array();
  for (const auto& p : probes) {
    const auto set = paradigms::build_patch_vectors(p.probe, ctx.config.alphas, ctx.config.n_random, ctx.config.seed);
    if (set.no_random_controls) fmt::print(ctx.err, "warning: layer {} has no random-direction controls\n", set.layer);
    fmt::print(ctx.out, "layer {:>3}: |w| {:.4f}, {} doses, {} random controls\n", set.layer, set.weight_norm,
               set.alpha_levels.size(), ctx.config.n_random);
    sets.push_back(report::to_json(set));
  }
  json results = {{"patch_vectors", sets}};
  if (!ctx.config.trials.empty()) {
    if (!std::filesystem::exists(ctx.config.trials)) throw IoError("effects file " + ctx.config.trials + " does not exist");
    const auto rows = paradigms::analyze_patch_effects(paradigms::read_patch_effects(ctx.config.trials));
    ctx.provenance.push_back({{"path", ctx.config.trials}, {"sha256", sha256_file(ctx.config.trials)}, {"kind", "patch_effects"}});
    for (const auto& r : rows) {
      fmt::print(ctx.out, "layer {:>3} alpha {:.2f}: cat {:+.4f} rand {:.4f} specificity {:.1f}x{}\n", r.layer, r.alpha,
                 r.category_effect, r.mean_random_effect, r.specificity, r.monotonic ? "" : " (non-monotonic)");
    }
    results["specificity"] = report::to_json(rows);
  }
  ctx.emit(results);
}

void run_e7(Context& ctx) {
  const auto bundle = ctx.load_bundle();
  const auto layers = paradigms::run_rotation(bundle, ctx.config.rotation_window, ctx.layers());
  report::print_rotation(ctx.out, layers);
  ctx.emit({{"layers", report::to_json(layers)}, {"window", ctx.config.rotation_window}});
}

void run_e8(Context& ctx) {
  const auto bundle = ctx.load_bundle();
  json layers = json::array();
  for (auto l : paradigms::resolve_layers(bundle, ctx.layers())) {
    const auto r = paradigms::phase_reset(compute_centroids(bundle, l), bundle.stimuli, ctx.metric(), ctx.config.phase_window);
    fmt::print(ctx.out, "layer {:>3}: boundary/non-boundary {:.3f}  MW p {:.4g}\n", l, r.boundary_to_nonboundary_ratio, r.mw_p);
    layers.push_back({{"layer", l},
                      {"ratio", r.boundary_to_nonboundary_ratio},
                      {"mw_p", r.mw_p},
                      {"n_boundary", r.n_boundary},
                      {"n_other", r.n_other}});
  }
  ctx.emit({{"layers", layers}, {"window", ctx.config.phase_window}});
}

void run_e9(Context& ctx) {
  if (ctx.config.inputs.size() != 1) throw ConfigError("e9 takes one --input CSV (model_id,slope,cp_strength)");
  const auto& path = ctx.config.inputs.front();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line.find("model_id") == std::string::npos || line.find("slope") == std::string::npos ||
      line.find("cp_strength") == std::string::npos)
    throw SchemaError("e9 input needs columns model_id,slope,cp_strength");
  std::vector<paradigms::ModelSummary> models;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \r\t") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string id, slope, strength;
    std::getline(ss, id, ',');
    std::getline(ss, slope, ',');
    std::getline(ss, strength, ',');
    if (!strength.empty() && strength.back() == '\r') strength.pop_back();
    models.push_back({id, parse_double(slope, "slope"), parse_double(strength, "cp_strength")});
  }
  ctx.provenance.push_back({{"path", path}, {"sha256", sha256_file(path)}, {"kind", "model_summaries"}});
  const auto test = paradigms::cross_model_dissociation(models, ctx.config.permutations, ctx.config.seed);
  fmt::print(ctx.out, "slope vs CP strength: Spearman rho {:+.3f}, p {:.3f}, n = {}\n", test.rho, test.p_value, models.size());
  ctx.emit({{"correlation", report::to_json(test)}, {"n_models", models.size()}});
}

void run_e11(Context& ctx) {
  const auto bundle = ctx.load_bundle();
  const auto grid = default_lambda_grid();
  const auto run = paradigms::run_lambda_beta(bundle, ctx.metric(), grid, ctx.layers(), ctx.config.permutations,
                                              ctx.config.seed, ctx.config.workers);
  ctx.metadata["lambda_estimator"] = "grid argmax of Spearman rho, 0.00..2.00 step 0.05, ties to smaller lambda";
  ctx.metadata["beta_estimator"] = "Spearman rho of the continuous_log template";
  report::print_lambda_beta(ctx.out, run);
  ctx.emit(report::to_json(run));
}

void run_report(Context& ctx) {
  if (ctx.config.inputs.empty()) throw ConfigError("report needs at least one --input results document");
  std::vector<double> advantages;
  json summaries = json::array();
  for (const auto& path : ctx.config.inputs) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError(path + " is not a results document: " + e.what());
    }
    ctx.provenance.push_back({{"path", path}, {"sha256", sha256_file(path)}, {"kind", "results"}});
    const std::string command = doc.value("command", "");
    fmt::print(ctx.out, "{} ({})\n", path, command);
    const auto& results = doc.at("results");
    if (results.contains("summary")) {
      for (const auto& [key, value] : results["summary"].items()) fmt::print(ctx.out, "  {}: {}\n", key, value.dump());
    }
    if (command == "rsa" || command == "e10") advantages.push_back(results.at("summary").at("mean_cp_advantage").get<double>());
    summaries.push_back({{"path", path}, {"command", command}});
  }
  json results = {{"documents", summaries}};
  if (advantages.size() == 2) {
    const double ratio = paradigms::boundary_ratio_e4(advantages[0], advantages[1]);
    fmt::print(ctx.out, "E4 ratio (second / first mean CP advantage): {:.2f}x\n", ratio);
    results["e4_ratio"] = ratio;
  }
  ctx.emit(results);
}

}  // namespace

int execute(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (std::find(kCommands.begin(), kCommands.end(), config.command) == kCommands.end())
      throw ConfigError("unknown command '" + config.command + "'");
    Context ctx{config, out, err};
    const auto& c = config.command;
    if (c == "synth") run_synth(ctx);
    else if (c == "rsa") run_rsa_command(ctx, false);
    else if (c == "e10") run_rsa_command(ctx, true);
    else if (c == "h4") run_h4_command(ctx);
    else if (c == "identify") run_identify(ctx);
    else if (c == "discrim") run_discrim(ctx);
    else if (c == "precision") run_precision_command(ctx);
    else if (c == "probe") run_probe_command(ctx);
    else if (c == "patch-vectors") run_patch_vectors(ctx);
    else if (c == "e7") run_e7(ctx);
    else if (c == "e8") run_e8(ctx);
    else if (c == "e9") run_e9(ctx);
    else if (c == "e11") run_e11(ctx);
    else if (c == "report") run_report(ctx);
    return 0;
  } catch (const Error& e) {
    fmt::print(err, "{}: {}\n", e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(err, "InternalError: {}\n", e.what());
    return 1;
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"cpgeo: categorical-perception geometry analysis for hidden-state bundles"};
  app.require_subcommand(1);
  RunConfig config;

  for (const auto& name : kCommands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--input", config.inputs, "Input bundle / results / CSV file (repeatable for report)");
    sub->add_option("--trials", config.trials, "Trials or patch-effects file");
    sub->add_option("--out", config.out, "Output file (results document, or bundle for synth)");
    sub->add_option("--seed", config.seed, "Base seed")->capture_default_str();
    sub->add_option("--permutations", config.permutations, "Permutations per test")->capture_default_str();
    sub->add_option("--metric", config.metric, "Empirical metric")->check(CLI::IsMember({"cosine", "euclidean"}))->capture_default_str();
    sub->add_option("--fdr-alpha", config.fdr_alpha, "BH-FDR level / significance level")->capture_default_str();
    sub->add_option("--lambda", config.lambda, "CP-Additive template boost")->capture_default_str();
    sub->add_option("--gamma", config.gamma, "CP-Multiplicative template boost")->capture_default_str();
    sub->add_option("--layers", config.layers, "Layer range a..b (inclusive)");
    sub->add_option("--primary-layers", config.primary_layers, "Primary layer range a..b for summary counts");
    sub->add_option("--workers", config.workers, "Worker threads")->capture_default_str();
    sub->add_option("--boundary", config.boundary, "Category boundary");
    sub->add_option("--ridge-penalty", config.ridge_penalty, "Probe ridge penalty")->capture_default_str();
    sub->add_option("--alphas", config.alphas, "Patch dose levels")->delimiter(',');
    sub->add_option("--n-random", config.n_random, "Random-direction controls per dose")->capture_default_str();
    sub->add_option("--window", config.rotation_window, "E7 window (stimuli per side)")->capture_default_str();
    sub->add_option("--phase-window", config.phase_window, "E8 neighbor steps around the boundary step")->capture_default_str();
    sub->add_option("--n-layers", config.synth_layers, "synth: layer count")->capture_default_str();
    sub->add_option("--sentences", config.synth_sentences, "synth: sentences per stimulus")->capture_default_str();
    sub->add_option("--dim", config.synth_dim, "synth: hidden dimension")->capture_default_str();
    sub->add_option("--radius", config.synth_radius, "synth: arc radius")->capture_default_str();
    sub->add_option("--arc-span", config.synth_arc_span, "synth: arc span in radians")->capture_default_str();
    sub->add_option("--planted-lambda", config.synth_lambda, "synth: boundary displacement")->capture_default_str();
    sub->add_option("--noise", config.synth_noise, "synth: per-sentence gaussian sigma")->capture_default_str();
    sub->add_option("--values", config.synth_values, "synth: stimuli as lo..hi or comma list")->capture_default_str();
    sub->add_option("--control-position", config.synth_control, "synth: control position label");
    sub->add_option("--condition", config.synth_condition, "synth: condition name")->capture_default_str();
    sub->add_option("--domain", config.synth_domain, "synth: numerical|temperature|nonce")->capture_default_str();
    sub->add_option("--model-id", config.synth_model, "synth: model id")->capture_default_str();
    sub->callback([&config, name] { config.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;  // --help exits cleanly
  }
  return execute(config, std::cout, std::cerr);
}

}  // namespace cpgeo::cli
