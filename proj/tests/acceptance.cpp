// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "cpgeo/cli.hpp"
#include "cpgeo/io_util.hpp"
#include "cpgeo/paradigms.hpp"
#include "cpgeo/stats.hpp"
#include "cpgeo/synth.hpp"
#include "oracles.hpp"

using namespace cpgeo;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= budget_seconds) {
    r.pass = false;
    r.detail += fmt::format("; over time budget {:.0f}s", budget_seconds);
  }
  if (!r.pass) ++failures;
  std::cout << fmt::format("{} {} ({:.2f}s): {}", r.pass ? "PASS" : "FAIL", name, secs, r.detail) << std::endl;
}

synth::SynthSpec planted_spec(double lambda, double sigma) {
  synth::SynthSpec s;
  s.stimuli = synth::decade10();
  s.n_layers = 33;
  s.n_sentences = 4;
  s.dim = 64;
  s.radius = 1.0;
  s.lambda_true = lambda;
  s.noise_sigma = sigma * s.radius;
  s.seed = 42;
  return s;
}

Outcome oracle_equivalence() {
  std::mt19937_64 gen(20240601);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> tie(0, 5);
  double worst_rho = 0, worst_reg = 0, worst_mw = 0, worst_pc = 0;
  const int instances = 120;
  for (int rep = 0; rep < instances; ++rep) {
    // Spearman, half of the instances with ties.
    const std::size_t n = 5 + rep % 20;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rep % 2 ? g(gen) : tie(gen);
      y[i] = rep % 3 ? g(gen) : tie(gen);
    }
    x[0] = 100.0;  // no constant vectors
    y[1] = -100.0;
    worst_rho = std::max(worst_rho, std::abs(stats::spearman_rho(x, y) - oracle::spearman(x, y)));

    // Hierarchical regression coefficients.
    const std::size_t m = 20 + rep % 40;
    std::vector<double> d(m), logd(m);
    std::vector<bool> cross(m);
    for (std::size_t i = 0; i < m; ++i) {
      logd[i] = std::abs(g(gen));
      cross[i] = (i * 7 + rep) % 3 == 0;
      d[i] = 0.2 + logd[i] + 0.5 * cross[i] + 0.3 * g(gen);
    }
    const auto got = fitting::hierarchical_regression(d, logd, cross);
    const auto want = oracle::hierarchical(d, logd, cross);
    for (double e : {got.r2_step1 - want.r2_1, got.r2_step2 - want.r2_2, got.delta_r2 - want.delta,
                     got.intercept - want.b0, got.coef_logdist - want.b_log, got.coef_boundary - want.b_cross})
      worst_reg = std::max(worst_reg, std::abs(e));

    // Mann-Whitney, exact regime.
    const std::size_t na = 2 + rep % 3, nb = 2 + (rep / 3) % 3;
    std::vector<double> a(na), b(nb);
    for (auto& v : a) v = rep % 2 ? g(gen) : tie(gen);
    for (auto& v : b) v = rep % 2 ? g(gen) + 0.5 : tie(gen);
    a[0] = -50.0;
    const auto mw = stats::mann_whitney_u(a, b);
    const auto mw_ref = oracle::mann_whitney_by_permutation(a, b);
    worst_mw = std::max({worst_mw, std::abs(mw.u - mw_ref.u), std::abs(mw.p_two_sided - mw_ref.p)});
    if (!mw.exact) return {false, "mann-whitney left the exact regime"};

    // Top principal component.
    const int rows = 10, dims = 4;
    Eigen::MatrixXd pts(rows, dims);
    oracle::Matrix raw(rows, std::vector<double>(dims));
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < dims; ++k) raw[i][k] = pts(i, k) = g(gen) * (1.0 + 2.0 * (dims - k));
    const auto pc = fitting::top_principal_component(pts);
    const auto ref = oracle::power_iteration_pc1(raw);
    for (int k = 0; k < dims; ++k) worst_pc = std::max(worst_pc, std::abs(pc(k) - ref[k]));
  }
  const double worst = std::max({worst_rho, worst_reg, worst_mw, worst_pc});
  return {worst <= 1e-8, fmt::format("{} instances each; max abs error spearman {:.1e}, regression {:.1e}, "
                                     "mann-whitney {:.1e}, pc1 {:.1e}",
                                     instances, worst_rho, worst_reg, worst_mw, worst_pc)};
}

Outcome mantel_exactness_and_calibration() {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_rdm = [&](std::size_t n) {
    Rdm r(n, "rand");
    for (auto& e : r.entries) e = u(gen);
    return r;
  };
  auto square = [](const Rdm& r) {
    std::vector<std::vector<double>> m(r.n, std::vector<double>(r.n, 0.0));
    for (std::size_t i = 0; i < r.n; ++i)
      for (std::size_t j = 0; j < r.n; ++j) m[i][j] = r.at(i, j);
    return m;
  };
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = random_rdm(4);
    const auto b = rep % 5 == 0 ? a : random_rdm(4);
    const auto res = stats::mantel_test(a, b, 10000, 42);
    if (!res.exhaustive) return {false, "n=4 test did not enumerate"};
    worst = std::max(worst, std::abs(res.p_value - oracle::exhaustive_mantel_p(square(a), square(b))));
  }
  int rejections = 0;
  const int draws = 500;
  for (int rep = 0; rep < draws; ++rep) {
    const auto a = random_rdm(17), b = random_rdm(17);
    if (stats::mantel_test(a, b, 1000, 1000 + rep).p_value <= 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / draws;
  const bool ok = worst <= 1e-12 && rate >= 0.031 && rate <= 0.072;
  return {ok, fmt::format("n=4 max |p - enumeration| {:.1e} over 50 cases; null rejection rate {:.3f} "
                          "({} / {}) vs band [0.031, 0.072]",
                          worst, rate, rejections, draws)};
}

Outcome planted_recovery() {
  paradigms::RsaOptions o;
  o.permutations = 10000;
  o.seed = 42;
  o.workers = 4;
  const auto planted = synth::generate(planted_spec(1.0, 0.1), 4);
  const auto rsa = paradigms::run_rsa(planted, o);
  const auto h4 = paradigms::run_h4(planted, o.metric, {}, {}, 0.05, 4);
  std::size_t cp_layers = 0, h4_layers = 0;
  for (const auto& l : rsa.layers) cp_layers += l.cp_advantage > 0.0;
  for (const auto& l : h4.layers) h4_layers += l.regression.delta_r2 > 0.0 && l.regression.p_value < 0.001;

  // Unplanted controls: continuous must win on average; the boundary
  // regressor must add nothing in noiseless geometry.
  const auto control_noisy = synth::generate(planted_spec(0.0, 0.1), 4);
  const auto control_clean = synth::generate(planted_spec(0.0, 0.0), 4);
  const auto rsa_noisy = paradigms::run_rsa(control_noisy, o);
  const auto rsa_clean = paradigms::run_rsa(control_clean, o);
  const auto h4_clean = paradigms::run_h4(control_clean, o.metric, {}, {}, 0.05, 4);
  const auto h4_noisy = paradigms::run_h4(control_noisy, o.metric, {}, {}, 0.05, 4);
  double max_clean = 0.0, max_noisy = 0.0;
  for (const auto& l : h4_clean.layers) max_clean = std::max(max_clean, l.regression.delta_r2);
  for (const auto& l : h4_noisy.layers) max_noisy = std::max(max_noisy, l.regression.delta_r2);

  const std::size_t n = planted.n_layers;
  const bool ok = cp_layers == n && h4_layers == n && rsa_noisy.mean_cp_advantage <= 0.0 &&
                  rsa_clean.mean_cp_advantage <= 0.0 && max_clean < 0.01;
  return {ok, fmt::format("planted: CP>Cont {}/{} layers, H4 dR2>0 & p<.001 {}/{} layers (mean dR2 {:.3f}); "
                          "lambda=0 control: mean d_rho {:+.4f} (sigma=0.1R), {:+.4f} (sigma=0), "
                          "max dR2 {:.4f} (sigma=0, bound 0.01); informational max dR2 at sigma=0.1R {:.4f}",
                          cp_layers, n, h4_layers, n, h4.mean_delta_r2, rsa_noisy.mean_cp_advantage,
                          rsa_clean.mean_cp_advantage, max_clean, max_noisy)};
}

Outcome precision_recovery() {
  // Displacement sqrt(3) * chord(9, 10) doubles the 9 -> 10 Euclidean step.
  const double span = std::numbers::pi / 3.0;
  auto theta = [&](double v) { return span * (std::log(v) - std::log(4.0)) / (std::log(20.0) - std::log(4.0)); };
  const double chord = 2.0 * std::sin((theta(10) - theta(9)) / 2.0);
  auto spec = planted_spec(std::sqrt(3.0) * chord, 0.0);
  spec.n_layers = 4;
  const auto planted = paradigms::run_precision(synth::generate(spec), Metric::euclidean);

  synth::SynthSpec control;
  control.stimuli.condition = "control_15";
  control.stimuli.values = synth::integer_range(11, 19);
  control.stimuli.control_position = 15;
  control.n_layers = 4;
  const auto ctrl = paradigms::run_precision(synth::generate(control), Metric::euclidean);

  double lo = 1e9, hi = -1e9, clo = 1e9, chi = -1e9;
  for (const auto& l : planted) {
    lo = std::min(lo, l.boundary_ratio);
    hi = std::max(hi, l.boundary_ratio);
  }
  for (const auto& l : ctrl) {
    clo = std::min(clo, l.boundary_ratio);
    chi = std::max(chi, l.boundary_ratio);
  }
  const bool ok = lo >= 1.8 && hi <= 2.2 && clo >= 0.9 && chi <= 1.1;
  return {ok, fmt::format("planted boundary ratio {:.3f}..{:.3f} (want [1.8, 2.2]); control 11..19 ratio "
                          "{:.3f}..{:.3f} (want [0.9, 1.1]); euclidean metric",
                          lo, hi, clo, chi)};
}

Outcome sigmoid_recovery() {
  std::vector<double> x, p, flat;
  for (int v = 4; v <= 20; ++v) {
    x.push_back(v);
    p.push_back(1.0 / (1.0 + std::exp(-6.3 * (v - 10.0))));
    flat.push_back(0.5);
  }
  const auto fit = fitting::fit_sigmoid(x, p);
  const auto none = fitting::fit_sigmoid(x, flat);
  const double ex = std::abs(fit.crossover - 10.0), ek = std::abs(fit.slope - 6.3) / 6.3;
  const bool ok = ex <= 0.05 && ek <= 0.05 && !none.crossover_defined;
  return {ok, fmt::format("x0 {:.5f} (err {:.1e}), k {:.5f} (rel err {:.1e}); flat curve crossover defined: {}",
                          fit.crossover, ex, fit.slope, ek, none.crossover_defined)};
}

Outcome specificity() {
  const std::vector<double> randoms = {0.00512, 0.01260, 0.00886, 0.00700, 0.01072};
  const double r = paradigms::specificity_ratio(0.621, randoms);
  return {std::abs(r - 70.1) <= 0.1, fmt::format("ratio {:.3f} (want 70.1 +- 0.1)", r)};
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "cpgeo_acceptance";
  std::filesystem::create_directories(dir);
  cli::RunConfig s;
  s.command = "synth";
  s.boundary = 10.0;
  s.synth_lambda = 1.0;
  s.synth_noise = 0.1;
  s.out = (dir / "bundle.cpb").string();
  std::ostringstream sink;
  if (cli::execute(s, sink, sink) != 0) return {false, "synth failed: " + sink.str()};

  std::vector<std::string> digests;
  for (const std::string command : {"synth", "rsa", "h4", "patch-vectors"}) {
    std::string first;
    int runs = 0;
    for (unsigned workers : {1u, 4u, 1u, 4u, 1u, 4u}) {
      cli::RunConfig c = command == "synth" ? s : cli::RunConfig{};
      c.command = command;
      if (command != "synth") c.inputs = {s.out};
      c.permutations = 2000;
      c.workers = workers;
      c.out = (dir / (command + ".out")).string();
      if (cli::execute(c, sink, sink) != 0) return {false, command + " failed"};
      const auto digest = sha256_file(c.out);
      if (first.empty()) first = digest;
      if (digest != first) return {false, fmt::format("{} output differs on run {} (workers {})", command, runs + 1, workers)};
      ++runs;
    }
    digests.push_back(command + " " + first.substr(0, 12));
  }
  return {true, fmt::format("6 runs each (workers 1 and 4, 3 runs apiece) identical: {}", fmt::join(digests, ", "))};
}

Outcome bh_exactness() {
  const std::vector<double> hand = {0.01, 0.02, 0.04};
  const auto h = stats::bh_fdr(hand, 0.05);
  bool ok = h.rejected == std::vector<bool>{true, true, true};
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 0.15);
  int mismatches = 0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> p(2 + rep % 30);
    for (auto& v : p) v = rep % 4 == 0 ? std::round(u(gen) * 200) / 2000 : u(gen);
    const auto out = stats::bh_fdr(p, 0.05);
    const auto q = oracle::quadratic_bh_q(p);
    if (out.rejected != oracle::quadratic_bh(p, 0.05) || out.adjusted != q) ++mismatches;
  }
  ok = ok && mismatches == 0;
  return {ok, fmt::format("hand example rejects all 3: {}; random cases mismatching the quadratic reference: {}/50",
                          h.rejected == std::vector<bool>{true, true, true}, mismatches)};
}

}  // namespace

int main() {
  criterion("oracle-equivalence", 10.0, oracle_equivalence);
  criterion("mantel-exactness-calibration", 60.0, mantel_exactness_and_calibration);
  criterion("planted-geometry-recovery", 60.0, planted_recovery);
  criterion("precision-gradient-recovery", 5.0, precision_recovery);
  criterion("sigmoid-recovery", 1.0, sigmoid_recovery);
  criterion("specificity-arithmetic", 1.0, specificity);
  criterion("determinism", 600.0, determinism);
  criterion("bh-fdr-exactness", 1.0, bh_exactness);
  std::cout << (failures == 0 ? "ALL PASS" : fmt::format("{} FAILED", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
