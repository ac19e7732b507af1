#include "cpgeo/data_model.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cpgeo/error.hpp"
#include "cpgeo/io_util.hpp"

namespace cpgeo {

using nlohmann::json;

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::numerical: return "numerical";
    case DomainKind::temperature: return "temperature";
    case DomainKind::nonce: return "nonce";
  }
  return "numerical";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "numerical") return DomainKind::numerical;
  if (name == "temperature") return DomainKind::temperature;
  if (name == "nonce") return DomainKind::nonce;
  throw ValidationError("unknown stimulus domain '" + name + "'");
}

// ---------------------------------------------------------------------------
// StimulusSet

int StimulusSet::category_of(double value) const {
  if (!boundary) throw DomainError("stimulus set '" + condition + "' has no boundary");
  return value < *boundary ? 0 : 1;
}

bool StimulusSet::needs_log_shift() const noexcept {
  return domain == DomainKind::temperature &&
         std::any_of(values.begin(), values.end(), [](double v) { return v <= 0.0; });
}

std::vector<double> StimulusSet::log_domain_values() const {
  if (!needs_log_shift()) return values;
  const double vmin = *std::min_element(values.begin(), values.end());
  std::vector<double> shifted(values.size());
  std::transform(values.begin(), values.end(), shifted.begin(),
                 [vmin](double v) { return v - vmin + 1.0; });
  return shifted;
}

std::optional<std::size_t> StimulusSet::straddling_pair(double position) const {
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i] < position && position <= values[i + 1]) return i;
  }
  return std::nullopt;
}

void StimulusSet::validate() const {
  if (values.size() < 3) throw ValidationError("stimulus set needs at least 3 values");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw ValidationError("non-finite stimulus value");
    if (i > 0 && !(values[i] > values[i - 1]))
      throw ValidationError("stimulus values must be strictly increasing");
  }
  if (domain != DomainKind::temperature && values.front() <= 0.0)
    throw ValidationError("numerical and nonce stimulus values must be positive");
  if (boundary) {
    if (!std::isfinite(*boundary)) throw ValidationError("non-finite boundary");
    if (!(values.front() < *boundary && *boundary <= values.back()))
      throw ValidationError("boundary must leave at least one value on each side");
  }
}

// ---------------------------------------------------------------------------
// HiddenStateBundle

void HiddenStateBundle::validate() const {
  stimuli.validate();
  if (n_layers < 1 || n_sentences < 1 || hidden_dim < 1)
    throw ValidationError("bundle dimensions must all be >= 1 (layers, sentences, hidden_dim)");
  if (role != "rsa" && role != "identification")
    throw ValidationError("bundle role must be 'rsa' or 'identification'");
  if (sentence_indices.size() != n_sentences)
    throw ValidationError("sentence_indices length does not match sentence count");
  if (role == "rsa") {
    for (int idx : sentence_indices) {
      if (std::find(std::begin(kIdentificationSentences), std::end(kIdentificationSentences),
                    idx) != std::end(kIdentificationSentences))
        throw ValidationError("rsa bundle uses identification sentence index " +
                              std::to_string(idx));
    }
  }
  if (tensor.size() != expected_size())
    throw ValidationError("tensor size does not match declared dimensions");
  for (float v : tensor) {
    if (!std::isfinite(v)) throw ValidationError("bundle tensor contains a non-finite entry");
  }
}

namespace {

json bundle_header(const HiddenStateBundle& b) {
  json h;
  h["model_id"] = b.model_id;
  h["condition"] = b.stimuli.condition;
  h["domain"] = to_string(b.stimuli.domain);
  h["role"] = b.role;
  h["layers"] = b.n_layers;
  h["sentences"] = b.n_sentences;
  h["hidden_dim"] = b.hidden_dim;
  h["stimuli"] = b.stimuli.values;
  h["boundary"] = b.stimuli.boundary ? json(*b.stimuli.boundary) : json(nullptr);
  if (b.stimuli.control_position) h["control_position"] = *b.stimuli.control_position;
  h["sentence_indices"] = b.sentence_indices;
  if (!b.token_position.empty()) h["token_position"] = b.token_position;
  return h;
}

template <typename T>
T required(const json& h, const char* key) {
  if (!h.contains(key)) throw FormatError(std::string("bundle header lacks '") + key + "'");
  try {
    return h.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bundle header field '") + key + "': " + e.what());
  }
}

std::uint32_t load_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32_le(std::uint32_t v, std::vector<std::uint8_t>& out) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

}  // namespace

std::vector<std::uint8_t> encode_bundle(const HiddenStateBundle& bundle) {
  bundle.validate();
  const std::string header = bundle_header(bundle).dump();
  std::vector<std::uint8_t> out;
  out.reserve(8 + header.size() + bundle.tensor.size() * 4);
  out.insert(out.end(), std::begin(kBundleMagic), std::end(kBundleMagic));
  store_u32_le(static_cast<std::uint32_t>(header.size()), out);
  out.insert(out.end(), header.begin(), header.end());
  for (float v : bundle.tensor) store_u32_le(std::bit_cast<std::uint32_t>(v), out);
  return out;
}

HiddenStateBundle decode_bundle(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kBundleMagic, 4) != 0)
    throw FormatError("missing 'CPB1' magic (unknown format or version)");
  const std::uint32_t header_len = load_u32_le(bytes.data() + 4);
  if (bytes.size() - 8 < header_len) throw CorruptPayload("header truncated");

  json h;
  try {
    h = json::parse(bytes.begin() + 8, bytes.begin() + 8 + header_len);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bundle header is not valid JSON: ") + e.what());
  }
  if (!h.is_object()) throw FormatError("bundle header must be an object");

  HiddenStateBundle b;
  b.model_id = required<std::string>(h, "model_id");
  b.stimuli.condition = required<std::string>(h, "condition");
  b.stimuli.domain = domain_kind_from_string(h.value("domain", std::string("numerical")));
  b.role = required<std::string>(h, "role");
  b.n_layers = required<std::size_t>(h, "layers");
  b.n_sentences = required<std::size_t>(h, "sentences");
  b.hidden_dim = required<std::size_t>(h, "hidden_dim");
  b.stimuli.values = required<std::vector<double>>(h, "stimuli");
  if (h.contains("boundary") && !h["boundary"].is_null())
    b.stimuli.boundary = required<double>(h, "boundary");
  if (h.contains("control_position") && !h["control_position"].is_null())
    b.stimuli.control_position = required<double>(h, "control_position");
  b.sentence_indices = required<std::vector<int>>(h, "sentence_indices");
  b.token_position = h.value("token_position", std::string());

  const std::size_t payload = bytes.size() - 8 - header_len;
  const std::size_t expected = b.expected_size() * 4;
  if (payload != expected)
    throw CorruptPayload("payload holds " + std::to_string(payload) + " bytes, header declares " +
                         std::to_string(expected));
  b.tensor.resize(b.expected_size());
  const std::uint8_t* p = bytes.data() + 8 + header_len;
  for (std::size_t k = 0; k < b.tensor.size(); ++k, p += 4)
    b.tensor[k] = std::bit_cast<float>(load_u32_le(p));

  b.validate();
  return b;
}

HiddenStateBundle read_bundle(const std::filesystem::path& path) {
  return decode_bundle(read_file_bytes(path));
}

void write_bundle(const HiddenStateBundle& bundle, const std::filesystem::path& path) {
  const auto bytes = encode_bundle(bundle);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

// ---------------------------------------------------------------------------
// Rdm

void Rdm::validate() const {
  if (entries.size() != condensed_size(n))
    throw ValidationError("rdm '" + label + "' has wrong condensed length");
  for (double e : entries) {
    if (!std::isfinite(e) || e < 0.0)
      throw ValidationError("rdm '" + label + "' has a negative or non-finite entry");
  }
}

// ---------------------------------------------------------------------------
// Trials

TrialRecord make_trial(double value_a, double value_b, PresentationOrder order, double logit_a,
                       double logit_b, const std::optional<double>& boundary) {
  if (!std::isfinite(value_a) || !std::isfinite(value_b) || !std::isfinite(logit_a) ||
      !std::isfinite(logit_b))
    throw ValidationError("trial has a non-finite field");
  if (value_a <= 0.0 || value_b <= 0.0)
    throw DomainError("trial values must be positive to take log distances");
  TrialRecord t;
  t.value_a = value_a;
  t.value_b = value_b;
  t.order = order;
  t.logit_a = logit_a;
  t.logit_b = logit_b;
  t.abs_delta_logit = std::abs(logit_a - logit_b);
  t.log_distance = std::abs(std::log(value_a) - std::log(value_b));
  if (boundary) t.is_cross_boundary = (value_a < *boundary) != (value_b < *boundary);
  return t;
}

void assign_distance_bins(std::vector<TrialRecord>& trials, int n_bins) {
  const std::size_t n = trials.size();
  if (n == 0) return;
  std::vector<double> sorted(n);
  std::transform(trials.begin(), trials.end(), sorted.begin(),
                 [](const TrialRecord& t) { return t.log_distance; });
  std::sort(sorted.begin(), sorted.end());
  for (auto& t : trials) {
    const auto below = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), t.log_distance) - sorted.begin());
    t.distance_bin = std::min<int>(n_bins - 1, static_cast<int>(below * n_bins / n));
  }
}

namespace {

std::vector<std::string> split_row(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == delim) cells.emplace_back();
  return cells;
}

double parse_real(const std::string& text, std::size_t line_no, const std::string& column) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty())
    throw ParseError("line " + std::to_string(line_no) + ": column '" + column +
                     "' is not a number: '" + text + "'");
  return v;
}

bool parse_flag(const std::string& text, std::size_t line_no) {
  if (text == "1" || text == "true" || text == "True") return true;
  if (text == "0" || text == "false" || text == "False") return false;
  throw ParseError("line " + std::to_string(line_no) + ": bad boolean '" + text + "'");
}

}  // namespace

std::vector<TrialRecord> parse_trials(std::istream& in, const std::optional<double>& boundary) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("trials file is empty");
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
  const auto header = split_row(line, delim);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : {"value_a", "value_b", "order", "logit_a", "logit_b"}) {
    if (!col.contains(name)) throw SchemaError(std::string("trials file lacks column '") + name + "'");
  }

  std::vector<TrialRecord> trials;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_row(line, delim);
    if (cells.size() < header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " cells");
    auto cell = [&](const char* name) -> const std::string& { return cells[col.at(name)]; };
    auto num = [&](const char* name) { return parse_real(cell(name), line_no, name); };

    PresentationOrder order;
    if (cell("order") == "AB") order = PresentationOrder::AB;
    else if (cell("order") == "BA") order = PresentationOrder::BA;
    else throw ParseError("line " + std::to_string(line_no) + ": order must be AB or BA");

    TrialRecord t = make_trial(num("value_a"), num("value_b"), order, num("logit_a"),
                               num("logit_b"), boundary);
    if (col.contains("framing")) t.framing = cell("framing");
    if (col.contains("layer") && !cell("layer").empty())
      t.layer = static_cast<int>(parse_real(cell("layer"), line_no, "layer"));

    // Derived columns are optional; when present they must agree with the recomputation.
    if (col.contains("abs_delta_logit") && !cell("abs_delta_logit").empty() &&
        std::abs(num("abs_delta_logit") - t.abs_delta_logit) > 1e-9 * (1.0 + t.abs_delta_logit))
      throw ValidationError("line " + std::to_string(line_no) + ": abs_delta_logit mismatch");
    if (col.contains("log_distance") && !cell("log_distance").empty() &&
        std::abs(num("log_distance") - t.log_distance) > 1e-9 * (1.0 + t.log_distance))
      throw ValidationError("line " + std::to_string(line_no) + ": log_distance mismatch");
    if (boundary && col.contains("is_cross_boundary") && !cell("is_cross_boundary").empty() &&
        parse_flag(cell("is_cross_boundary"), line_no) != t.is_cross_boundary)
      throw ValidationError("line " + std::to_string(line_no) + ": is_cross_boundary mismatch");
    trials.push_back(std::move(t));
  }
  assign_distance_bins(trials);
  return trials;
}

std::vector<TrialRecord> read_trials(const std::filesystem::path& path,
                                     const std::optional<double>& boundary) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trials file " + path.string());
  return parse_trials(in, boundary);
}

}  // namespace cpgeo
