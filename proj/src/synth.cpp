#include "cpgeo/synth.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "cpgeo/error.hpp"
#include "cpgeo/parallel.hpp"
#include "cpgeo/rng.hpp"

namespace cpgeo::synth {

void SynthSpec::validate() const {
  stimuli.validate();
  if (dim < 3) throw ValidationError("synthetic dim must be >= 3");
  if (n_layers < 1 || n_sentences < 1) throw ValidationError("synthetic layers/sentences must be >= 1");
  if (!(radius > 0.0)) throw ValidationError("radius must be positive");
  if (!(arc_span > 0.0 && arc_span < std::numbers::pi)) throw ValidationError("arc_span must lie in (0, pi)");
  if (!(lambda_true >= 0.0) || !(noise_sigma >= 0.0))
    throw ValidationError("lambda_true and noise_sigma must be >= 0");
  if (!lambda_per_layer.empty() && lambda_per_layer.size() != n_layers)
    throw ValidationError("lambda_per_layer must have one entry per layer");
  if (!sigma_per_layer.empty() && sigma_per_layer.size() != n_layers)
    throw ValidationError("sigma_per_layer must have one entry per layer");
  for (double v : lambda_per_layer) {
    if (!(v >= 0.0)) throw ValidationError("lambda_per_layer entries must be >= 0");
  }
  for (double v : sigma_per_layer) {
    if (!(v >= 0.0)) throw ValidationError("sigma_per_layer entries must be >= 0");
  }
}

std::vector<double> integer_range(int lo, int hi) {
  std::vector<double> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

StimulusSet decade10() {
  StimulusSet s;
  s.condition = "decade_10";
  s.values = integer_range(4, 20);
  s.boundary = 10.0;
  return s;
}

HiddenStateBundle generate(const SynthSpec& spec, unsigned workers) {
  spec.validate();
  HiddenStateBundle b;
  b.model_id = spec.model_id;
  b.stimuli = spec.stimuli;
  b.role = "rsa";
  b.n_layers = spec.n_layers;
  b.n_sentences = spec.n_sentences;
  b.hidden_dim = spec.dim;
  b.token_position = "synthetic";
  for (std::size_t s = 0; s < spec.n_sentences; ++s) b.sentence_indices.push_back(static_cast<int>(4 + s));
  b.tensor.assign(b.expected_size(), 0.0f);

  const auto logs = [&] {
    auto v = spec.stimuli.log_domain_values();
    for (double& x : v) x = std::log(x);
    return v;
  }();
  const double log_span = logs.back() - logs.front();
  const auto d = static_cast<Eigen::Index>(spec.dim);

  parallel_for(spec.n_layers, workers, [&](std::size_t layer) {
    CounterRng rng(layer_substream(spec.seed, layer));
    auto draw = [&] {
      Eigen::VectorXd v(d);
      for (Eigen::Index k = 0; k < d; ++k) v(k) = rng.gaussian();
      return v;
    };
    // Gram-Schmidt on three gaussian draws.
    Eigen::VectorXd u1 = draw().normalized();
    Eigen::VectorXd u2 = draw();
    u2 = (u2 - u2.dot(u1) * u1).normalized();
    Eigen::VectorXd axis = draw();
    axis = (axis - axis.dot(u1) * u1 - axis.dot(u2) * u2).normalized();

    const double lambda = spec.lambda_per_layer.empty() ? spec.lambda_true : spec.lambda_per_layer[layer];
    const double sigma = spec.sigma_per_layer.empty() ? spec.noise_sigma : spec.sigma_per_layer[layer];
    for (std::size_t i = 0; i < spec.stimuli.size(); ++i) {
      const double theta = spec.arc_span * (logs[i] - logs.front()) / log_span;
      Eigen::VectorXd center = spec.radius * (std::cos(theta) * u1 + std::sin(theta) * u2);
      if (spec.stimuli.boundary && spec.stimuli.values[i] >= *spec.stimuli.boundary) center += lambda * axis;
      for (std::size_t s = 0; s < spec.n_sentences; ++s) {
        auto out = b.vector(layer, i, s);
        for (Eigen::Index k = 0; k < d; ++k) {
          const double noise = sigma > 0.0 ? sigma * rng.gaussian() : 0.0;
          out[static_cast<std::size_t>(k)] = static_cast<float>(center(k) + noise);
        }
      }
    }
  });
  b.validate();
  return b;
}

}  // namespace cpgeo::synth
