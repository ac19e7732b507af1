#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cpgeo {

enum class DomainKind { numerical, temperature, nonce };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

// Ordered stimulus magnitudes of one experimental condition.
struct StimulusSet {
  std::string condition = "unnamed";
  DomainKind domain = DomainKind::numerical;
  std::vector<double> values;
  std::optional<double> boundary;
  // Reference position for boundary-free control conditions (labeling only).
  std::optional<double> control_position;

  std::size_t size() const noexcept { return values.size(); }

  // 0 below the boundary, 1 at or above it. Throws DomainError without a boundary.
  int category_of(double value) const;
  bool crosses_boundary(double a, double b) const { return category_of(a) != category_of(b); }

  // True when log-based templates need the v - v_min + 1 shift.
  bool needs_log_shift() const noexcept;
  // Values fed to log-based templates; shifted when needs_log_shift().
  std::vector<double> log_domain_values() const;

  // Index of the adjacent pair (i, i+1) with values[i] < position <= values[i+1].
  std::optional<std::size_t> straddling_pair(double position) const;

  void validate() const;
};

// Activations for one model: tensor[layer][stimulus][sentence][dim], float32.
class HiddenStateBundle {
 public:
  std::string model_id = "unknown";
  StimulusSet stimuli;
  std::string role = "rsa";
  std::size_t n_layers = 0;
  std::size_t n_sentences = 0;
  std::size_t hidden_dim = 0;
  std::vector<int> sentence_indices;
  std::string token_position;
  std::vector<float> tensor;

  std::size_t n_stimuli() const noexcept { return stimuli.size(); }
  std::size_t expected_size() const noexcept {
    return n_layers * n_stimuli() * n_sentences * hidden_dim;
  }
  std::size_t offset(std::size_t layer, std::size_t stimulus, std::size_t sentence) const noexcept {
    return ((layer * n_stimuli() + stimulus) * n_sentences + sentence) * hidden_dim;
  }
  std::span<const float> vector(std::size_t layer, std::size_t stimulus, std::size_t sentence) const {
    return {tensor.data() + offset(layer, stimulus, sentence), hidden_dim};
  }
  std::span<float> vector(std::size_t layer, std::size_t stimulus, std::size_t sentence) {
    return {tensor.data() + offset(layer, stimulus, sentence), hidden_dim};
  }

  void validate() const;
};

// Sentence ids reserved for identification trials; RSA bundles must not use them.
inline constexpr int kIdentificationSentences[] = {0, 1, 2, 3};

inline constexpr char kBundleMagic[4] = {'C', 'P', 'B', '1'};

HiddenStateBundle read_bundle(const std::filesystem::path& path);
void write_bundle(const HiddenStateBundle& bundle, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_bundle(const HiddenStateBundle& bundle);
HiddenStateBundle decode_bundle(std::span<const std::uint8_t> bytes);

// Position of pair (i, j), i < j, in the row-major condensed upper triangle.
constexpr std::size_t condensed_index(std::size_t i, std::size_t j, std::size_t n) noexcept {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}
constexpr std::size_t condensed_size(std::size_t n) noexcept { return n * (n - 1) / 2; }

// Condensed pairwise dissimilarities over n stimuli.
struct Rdm {
  std::size_t n = 0;
  std::vector<double> entries;
  std::string label;

  Rdm() = default;
  Rdm(std::size_t n_items, std::string name)
      : n(n_items), entries(condensed_size(n_items), 0.0), label(std::move(name)) {}

  double at(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return entries[condensed_index(i, j, n)];
  }
  double& at_mut(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return entries[condensed_index(i, j, n)];
  }

  void validate() const;
};

enum class PresentationOrder { AB, BA };

// One forced-choice trial.
struct TrialRecord {
  double value_a = 0.0;
  double value_b = 0.0;
  PresentationOrder order = PresentationOrder::AB;
  double logit_a = 0.0;
  double logit_b = 0.0;
  double abs_delta_logit = 0.0;
  bool is_cross_boundary = false;
  double log_distance = 0.0;
  int distance_bin = 0;
  std::string framing;
  std::optional<int> layer;
};

// Builds a record from raw columns and fills the derived fields.
TrialRecord make_trial(double value_a, double value_b, PresentationOrder order, double logit_a,
                       double logit_b, const std::optional<double>& boundary);

// Equal-count bins over log_distance; tied distances always share a bin.
void assign_distance_bins(std::vector<TrialRecord>& trials, int n_bins = 6);

std::vector<TrialRecord> parse_trials(std::istream& in, const std::optional<double>& boundary);
std::vector<TrialRecord> read_trials(const std::filesystem::path& path,
                                     const std::optional<double>& boundary);

}  // namespace cpgeo
