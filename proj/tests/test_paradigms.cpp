#include <doctest.h>

#include <cmath>
#include <random>

#include "cpgeo/error.hpp"
#include "cpgeo/paradigms.hpp"
#include "cpgeo/synth.hpp"

using namespace cpgeo;
using namespace cpgeo::paradigms;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

// Two trials (one per order) per value, with P(category b) set per order.
std::vector<TrialRecord> identification_trials(const std::string& framing, const std::vector<double>& values,
                                               const std::function<double(double, PresentationOrder)>& prob) {
  std::vector<TrialRecord> out;
  for (double v : values)
    for (auto o : {PresentationOrder::AB, PresentationOrder::BA}) {
      auto t = make_trial(v, 10.0, o, 0.0, logit(prob(v, o)), 10.0);
      t.framing = framing;
      out.push_back(t);
    }
  return out;
}

std::vector<double> grid_4_20() { return synth::integer_range(4, 20); }

CentroidSet line_centroids(const std::vector<double>& positions) {
  CentroidSet c;
  c.vectors = Eigen::MatrixXd::Zero(static_cast<long>(positions.size()), 3);
  for (std::size_t i = 0; i < positions.size(); ++i) c.vectors(long(i), 0) = positions[i];
  return c;
}

}  // namespace

TEST_CASE("layer helpers") {
  CHECK(default_primary_layers(33).size() == 32);
  CHECK(default_primary_layers(33).front() == 1);
  CHECK(default_primary_layers(1) == std::vector<std::size_t>{0});
  CHECK(default_baseline(DomainKind::nonce) == ModelKind::ordinal_continuous);
  CHECK(default_baseline(DomainKind::numerical) == ModelKind::continuous_log);
}

TEST_CASE("rsa on a single-layer bundle reduces fdr to p <= alpha") {
  auto spec = synth::SynthSpec{};
  spec.stimuli = synth::decade10();
  spec.n_layers = 1;
  spec.lambda_true = 1.0;
  spec.noise_sigma = 0.1;
  RsaOptions o;
  o.permutations = 200;
  const auto run = run_rsa(synth::generate(spec), o);
  REQUIRE(run.layers.size() == 1);
  const auto& l = run.layers.front();
  for (const auto& [kind, p] : l.mantel_p_by_model) CHECK(l.fdr_significant.at(kind) == (p <= 0.05));
  CHECK(run.cp_wins == (l.cp_advantage > 0 ? 1u : 0u));
}

TEST_CASE("rsa summary counts agree with the per-layer results") {
  auto spec = synth::SynthSpec{};
  spec.stimuli = synth::decade10();
  spec.n_layers = 5;
  spec.lambda_true = 0.3;
  spec.noise_sigma = 0.1;
  RsaOptions o;
  o.permutations = 100;
  const auto run = run_rsa(synth::generate(spec), o);
  std::size_t wins = 0, add = 0;
  double sum = 0;
  for (const auto& l : run.layers) {
    if (l.layer == 0) continue;
    wins += l.cp_advantage > 0;
    add += l.add_vs_mult;
    sum += l.cp_advantage;
  }
  CHECK(run.cp_wins == wins);
  CHECK(run.add_over_mult == add);
  CHECK(run.mean_cp_advantage == doctest::Approx(sum / 4.0));
}

TEST_CASE("counterbalancing cancels symmetric position bias") {
  const auto trials = identification_trials("plain", grid_4_20(), [](double, PresentationOrder o) {
    return o == PresentationOrder::AB ? 0.9 : 0.1;
  });
  const auto r = run_identification(trials, 10.0);
  REQUIRE(r.framings.size() == 1);
  for (double p : r.framings[0].p_category_b) CHECK(p == doctest::Approx(0.5));
  CHECK_FALSE(r.framings[0].fit.crossover_defined);
  CHECK_FALSE(r.framings[0].boundary_hit);
}

TEST_CASE("counterbalanced curve is the pointwise mean of the two orders") {
  const auto trials = identification_trials("f", grid_4_20(), [](double v, PresentationOrder o) {
    return o == PresentationOrder::AB ? 0.2 + 0.03 * v : 0.1 + 0.02 * v;
  });
  const auto r = run_identification(trials, 10.0);
  const auto& c = r.framings[0];
  for (std::size_t i = 0; i < c.values.size(); ++i)
    CHECK(c.p_category_b[i] == doctest::Approx(0.5 * (c.p_ab[i] + c.p_ba[i])));
}

TEST_CASE("sharp step at 10 is flagged as a boundary hit") {
  auto trials = identification_trials("sharp", grid_4_20(), [](double v, PresentationOrder) {
    return v >= 10 ? 0.999 : 0.001;
  });
  const auto flat = identification_trials("flat", grid_4_20(), [](double, PresentationOrder) { return 0.5; });
  trials.insert(trials.end(), flat.begin(), flat.end());
  const auto r = run_identification(trials, 10.0);
  REQUIRE(r.framings.size() == 2);
  const auto& flat_curve = r.framings[0].framing == "flat" ? r.framings[0] : r.framings[1];
  const auto& sharp = r.framings[0].framing == "sharp" ? r.framings[0] : r.framings[1];
  CHECK(sharp.fit.crossover == doctest::Approx(9.5).epsilon(0.06));
  CHECK(sharp.boundary_hit);
  CHECK_FALSE(flat_curve.boundary_hit);
  CHECK(std::isnan(r.crossover_delta[0][1]));
}

TEST_CASE("framing crossover deltas") {
  auto a = identification_trials("a", grid_4_20(), [](double v, PresentationOrder) { return fitting::logistic(v, 10, 2); });
  const auto b = identification_trials("b", grid_4_20(), [](double v, PresentationOrder) { return fitting::logistic(v, 12, 2); });
  a.insert(a.end(), b.begin(), b.end());
  const auto r = run_identification(a, 10.0);
  CHECK(r.crossover_delta[0][1] == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(r.crossover_delta_steps[1][0] == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(r.crossover_delta[0][0] == doctest::Approx(0.0));
}

TEST_CASE("missing order is an unbalanced design") {
  auto trials = identification_trials("f", grid_4_20(), [](double, PresentationOrder) { return 0.3; });
  trials.pop_back();
  CHECK_THROWS_AS(run_identification(trials, 10.0), UnbalancedDesign);
}

namespace {

std::vector<TrialRecord> discrimination_trials(std::uint64_t seed, const std::function<double(const TrialRecord&)>& boost) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(1.0, 0.3);
  std::vector<TrialRecord> out;
  for (int a = 4; a <= 20; ++a)
    for (int b = 4; b <= 20; ++b) {
      if (a == b) continue;
      auto t = make_trial(a, b, a < b ? PresentationOrder::AB : PresentationOrder::BA, 0.0, 0.0, 10.0);
      out.push_back(t);
    }
  assign_distance_bins(out, 6);
  for (auto& t : out) {
    const double conf = std::abs(g(gen)) + boost(t);
    t = [&] {
      auto r = make_trial(t.value_a, t.value_b, t.order, 0.0, conf, 10.0);
      r.distance_bin = t.distance_bin;
      return r;
    }();
  }
  return out;
}

}  // namespace

TEST_CASE("discrimination detects a cross-boundary boost") {
  const auto r = run_discrimination(discrimination_trials(1, [](const TrialRecord& t) { return t.is_cross_boundary ? 0.6 : 0.0; }));
  CHECK(r.overall.delta_conf > 0.0);
  CHECK(r.overall.cohens_d > 0.0);
  CHECK(r.overall.mw_p < 0.05);
  CHECK(r.per_bin.size() == 6);
}

TEST_CASE("discrimination null case") {
  const auto r = run_discrimination(discrimination_trials(2, [](const TrialRecord&) { return 0.0; }));
  CHECK(std::abs(r.overall.cohens_d) < 0.3);
  CHECK(r.overall.mw_p > 0.05);
}

TEST_CASE("boost in large-distance bins concentrates significance there") {
  const auto r = run_discrimination(discrimination_trials(3, [](const TrialRecord& t) {
    return t.is_cross_boundary && t.distance_bin >= 3 ? 0.8 : 0.0;
  }));
  std::size_t low = 0, high = 0;
  for (std::size_t b = 0; b < 6; ++b) (b < 3 ? low : high) += r.per_bin[b].significant;
  CHECK(high > low);
  CHECK(r.significant_bins == low + high);
}

TEST_CASE("discrimination without within pairs is degenerate") {
  std::vector<TrialRecord> trials = {make_trial(9, 11, PresentationOrder::AB, 0, 1, 10.0),
                                     make_trial(8, 12, PresentationOrder::AB, 0, 2, 10.0)};
  CHECK_THROWS_AS(run_discrimination(trials), DegenerateInput);
}

TEST_CASE("precision on uniform spacing") {
  StimulusSet s;
  s.values = {1, 2, 3, 4, 5, 6};
  s.boundary = 4;
  const auto r = precision_gradient(line_centroids({1, 2, 3, 4, 5, 6}), s, Metric::euclidean);
  CHECK(r.boundary_ratio == doctest::Approx(1.0));
  for (double p : r.precision) CHECK(p == doctest::Approx(1.0));
  CHECK(r.reference_pair == 2);
  CHECK_THROWS_AS(precision_gradient(line_centroids({1, 2, 2, 4, 5, 6}), s, Metric::euclidean), DegenerateVector);
}

TEST_CASE("precision reference pair falls back to control position, then the middle") {
  StimulusSet s;
  s.values = {11, 12, 13, 14, 15, 16, 17, 18, 19};
  CHECK(reference_pair(s) == 3);
  s.control_position = 15;
  CHECK(reference_pair(s) == 3);
  s.control_position = 17;
  CHECK(reference_pair(s) == 5);
}

TEST_CASE("patch vectors") {
  fitting::ProbeResult p;
  p.weights = Eigen::Vector2d(3, 4);
  p.weight_norm = 5;
  p.unit_direction = Eigen::Vector2d(0.6, 0.8);
  const auto set = build_patch_vectors(p, {0.0, 0.5, 1.0}, 10, 42);
  CHECK(set.category_deltas[0].norm() == 0.0);
  CHECK(set.category_deltas[1](0) == doctest::Approx(1.5));
  CHECK(set.category_deltas[1](1) == doctest::Approx(2.0));
  CHECK(set.category_deltas[1].norm() == doctest::Approx(2.5));
  // At alpha = 1 the projection on v_cat moves by |w|, so the raw score moves by |w|^2.
  Eigen::VectorXd x = Eigen::Vector2d(0.3, -0.2);
  CHECK(p.unit_direction.dot(set.category_deltas[2]) == doctest::Approx(5.0));
  CHECK(p.score(x + set.category_deltas[2]) - p.score(x) == doctest::Approx(25.0));
  CHECK(std::abs(set.category_deltas[2].normalized().dot(p.weights.normalized())) == doctest::Approx(1.0));
  for (std::size_t a = 0; a < 3; ++a) {
    REQUIRE(set.random_deltas[a].size() == 10);
    for (const auto& r : set.random_deltas[a]) CHECK(std::abs(r.norm() - set.alpha_levels[a] * 5.0) <= 1e-9);
  }
  const auto again = build_patch_vectors(p, {0.0, 0.5, 1.0}, 10, 42);
  CHECK(again.random_deltas[1][3] == set.random_deltas[1][3]);
  const auto none = build_patch_vectors(p, {0.5}, 0, 42);
  CHECK(none.no_random_controls);
}

TEST_CASE("specificity ratio") {
  std::vector<double> r = {0.00886, 0.00886};
  CHECK(specificity_ratio(0.621, r) == doctest::Approx(70.09).epsilon(1e-3));
  std::vector<double> eq = {0.2, 0.4};
  CHECK(specificity_ratio(0.3, eq) == doctest::Approx(1.0));
  CHECK(specificity_ratio(0.0, eq) == 0.0);
  // Random effects are compared by magnitude, so opposite signs do not cancel.
  std::vector<double> signs = {0.1, -0.1};
  CHECK(specificity_ratio(0.5, signs) == doctest::Approx(5.0));
  std::vector<double> zero = {0.0, 0.0};
  CHECK_THROWS_AS(specificity_ratio(0.5, zero), DegenerateInput);
}

TEST_CASE("patch effects table analysis") {
  std::vector<PatchEffect> effects;
  for (double a : {0.5, 1.0}) {
    effects.push_back({5, a, "category", 0.6 * a});
    for (int k = 0; k < 4; ++k) effects.push_back({5, a, "random_" + std::to_string(k), 0.01 * a});
  }
  const auto rows = analyze_patch_effects(effects);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].specificity == doctest::Approx(60.0));
  CHECK(rows[0].monotonic);
}

TEST_CASE("manifold rotation angles") {
  CentroidSet line = line_centroids({1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(manifold_rotation(line, 4, 4) == doctest::Approx(0.0).epsilon(1e-6));
  CentroidSet bend;
  bend.vectors = Eigen::MatrixXd::Zero(9, 3);
  for (int i = 0; i <= 4; ++i) bend.vectors(i, 0) = i;
  for (int i = 5; i <= 8; ++i) {
    bend.vectors(i, 0) = 4;
    bend.vectors(i, 1) = i - 4;
  }
  CHECK(manifold_rotation(bend, 4, 4) == doctest::Approx(90.0).epsilon(1e-6));
}

TEST_CASE("planted displacement rotates the manifold only at the boundary") {
  synth::SynthSpec spec;
  spec.stimuli = synth::decade10();
  spec.n_layers = 2;
  spec.lambda_true = 1.0;
  const auto rows = run_rotation(synth::generate(spec), 4);
  for (const auto& r : rows) {
    CHECK(r.boundary_angle > 45.0);
    CHECK(r.max_other_angle < 20.0);
  }
}

TEST_CASE("phase reset") {
  StimulusSet s;
  for (int v = 1; v <= 12; ++v) s.values.push_back(v);
  s.boundary = 7;
  // Straddling step is 6 -> 7 (index 5); window 1 groups steps 4, 5 and 6.
  auto centroids = [](const std::vector<double>& steps) {
    std::vector<double> pos = {0.0};
    for (double d : steps) pos.push_back(pos.back() + d);
    return line_centroids(pos);
  };
  const auto uniform = phase_reset(centroids(std::vector<double>(11, 1.0)), s, Metric::euclidean);
  CHECK(uniform.boundary_to_nonboundary_ratio == doctest::Approx(1.0));
  CHECK(uniform.mw_p > 0.05);
  CHECK(uniform.n_boundary == 3);
  CHECK(uniform.n_other == 8);
  std::vector<double> doubled(11, 1.0);
  for (int i : {4, 5, 6}) doubled[i] = 2.0;
  const auto planted = phase_reset(centroids(doubled), s, Metric::euclidean);
  CHECK(planted.boundary_to_nonboundary_ratio == doctest::Approx(2.0));
  CHECK(planted.mw_p < 0.05);
  std::vector<double> shrunk(11, 1.0);
  shrunk[5] = 0.5;
  CHECK(phase_reset(centroids(shrunk), s, Metric::euclidean).boundary_to_nonboundary_ratio < 1.0);
  CHECK_THROWS_AS(phase_reset(centroids(std::vector<double>(11, 1.0)), s, Metric::euclidean, 5), DegenerateInput);
}

TEST_CASE("cross-model dissociation and lambda-beta correlation") {
  std::vector<ModelSummary> same;
  for (int i = 0; i < 6; ++i) same.push_back({"m" + std::to_string(i), double(i), double(i)});
  CHECK(cross_model_dissociation(same, 1000, 1).rho == doctest::Approx(1.0));
  for (auto& m : same) m.identification_slope = 1.0;
  CHECK_THROWS_AS(cross_model_dissociation(same, 1000, 1), DegenerateInput);
  std::vector<double> flat = {1, 1, 1, 1, 1}, beta = {0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK_THROWS_AS(lambda_beta_correlation(flat, beta, 100, 1), DegenerateInput);
}

TEST_CASE("lambda-beta sweeps on planted layers") {
  synth::SynthSpec spec;
  spec.stimuli = synth::decade10();
  spec.n_layers = 8;
  for (int l = 0; l < 8; ++l) {
    spec.lambda_per_layer.push_back(0.05 + 0.1 * l);
    spec.sigma_per_layer.push_back(0.01 + 0.02 * l);
  }
  const auto grid = default_lambda_grid();
  const auto down = run_lambda_beta(synth::generate(spec), Metric::euclidean, grid, {}, 2000, 42);
  CHECK(down.correlation.rho < 0.0);

  // Noise falling fast enough that beta rises along with lambda.
  spec.lambda_per_layer.clear();
  spec.sigma_per_layer.clear();
  for (int l = 0; l < 8; ++l) {
    spec.lambda_per_layer.push_back(0.1 + 0.9 * l / 7.0);
    spec.sigma_per_layer.push_back(0.3 - 0.3 * l / 7.0);
  }
  const auto up = run_lambda_beta(synth::generate(spec), Metric::euclidean, grid, {}, 2000, 42);
  CHECK(up.correlation.rho > 0.0);
}

TEST_CASE("e4 ratio") {
  CHECK(boundary_ratio_e4(0.023, 0.319) == doctest::Approx(0.319 / 0.023));
  CHECK(boundary_ratio_e4(0.087, 0.476) == doctest::Approx(5.47).epsilon(1e-3));
  CHECK(boundary_ratio_e4(0.2, 0.2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(boundary_ratio_e4(0.0, 0.3), DegenerateInput);
}
