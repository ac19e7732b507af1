#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "cpgeo/data_model.hpp"

namespace cpgeo::synth {

// Planted geometry: stimulus v sits on an arc of radius R at angle
// theta(v) = arc_span * (log v - log v_min) / (log v_max - log v_min),
// displaced by lambda_true along a third orthogonal axis when v >= boundary.
struct SynthSpec {
  StimulusSet stimuli;
  std::size_t n_layers = 33;
  std::size_t n_sentences = 4;
  std::size_t dim = 64;
  double radius = 1.0;
  double arc_span = std::numbers::pi / 3.0;
  double lambda_true = 0.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 42;
  std::string model_id = "synthetic";
  // Optional per-layer overrides of lambda_true / noise_sigma (length n_layers).
  std::vector<double> lambda_per_layer;
  std::vector<double> sigma_per_layer;

  void validate() const;
};

// Integers lo..hi inclusive.
std::vector<double> integer_range(int lo, int hi);

// decade-10 set: 4..20 with boundary 10.
StimulusSet decade10();

HiddenStateBundle generate(const SynthSpec& spec, unsigned workers = 1);

}  // namespace cpgeo::synth
