#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cpgeo::cli {

inline const std::vector<std::string> kCommands = {"synth", "rsa", "h4",  "identify", "discrim",
                                                   "precision", "probe", "patch-vectors", "e7", "e8",
                                                   "e9", "e10", "e11", "report"};

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::string trials;
  std::string out;
  std::uint64_t seed = 42;
  std::size_t permutations = 10000;
  std::string metric = "cosine";
  double fdr_alpha = 0.05;
  double lambda = 1.0;
  double gamma = 1.0;
  std::string layers;          // "a..b" inclusive, empty = all
  std::string primary_layers;  // "a..b", empty = every non-embedding layer
  unsigned workers = 1;

  // identify / discrim
  std::optional<double> boundary;

  // probe / patch-vectors
  double ridge_penalty = 1.0;
  std::vector<double> alphas = {0.25, 0.5, 0.75, 1.0};
  std::size_t n_random = 10;

  // e7 / e8
  std::size_t rotation_window = 4;
  std::size_t phase_window = 1;

  // synth
  std::size_t synth_layers = 33;
  std::size_t synth_sentences = 4;
  std::size_t synth_dim = 64;
  double synth_radius = 1.0;
  double synth_arc_span = 1.0471975511965976;  // pi / 3
  double synth_lambda = 0.0;
  double synth_noise = 0.0;
  std::string synth_values = "4..20";
  std::optional<double> synth_control;
  std::string synth_condition = "decade_10";
  std::string synth_domain = "numerical";
  std::string synth_model = "synthetic";
};

// Fully resolved configuration as embedded in every results document.
// The worker count is omitted because results never depend on it.
nlohmann::json config_to_json(const RunConfig& config);

// Parses "a..b" (inclusive) or a single index.
std::vector<std::size_t> parse_layer_range(const std::string& text);
// Parses "lo..hi" integer ranges or comma-separated reals.
std::vector<double> parse_values(const std::string& text);

// Runs one command. Returns the process exit status; summaries go to `out`,
// progress and typed errors ("Kind: message") to `err`.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

// Builds a RunConfig from argv (CLI11) and runs it.
int main_entry(int argc, char** argv);

}  // namespace cpgeo::cli
