#include "cpgeo/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "cpgeo/error.hpp"
#include "cpgeo/parallel.hpp"
#include "cpgeo/rng.hpp"

namespace cpgeo::stats {

namespace {

// Tolerance used when comparing a permuted statistic with the observed one,
// so that relabelings reproducing the observed value exactly are counted.
constexpr double kTieTolerance = 1e-12;

// Centered ranks scaled to unit norm; a dot product of two such vectors is Spearman rho.
std::vector<double> standardized_ranks(std::span<const double> x) {
  auto r = midranks(x);
  const double m = mean(r);
  double ss = 0.0;
  for (double& v : r) {
    v -= m;
    ss += v * v;
  }
  if (ss <= 0.0) throw DegenerateInput("all values tied; rank variance is zero");
  const double inv = 1.0 / std::sqrt(ss);
  for (double& v : r) v *= inv;
  return r;
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

double mean(std::span<const double> x) {
  if (x.empty()) throw EmptyInput("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw DegenerateInput("variance needs at least 2 values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DegenerateInput("pearson: length mismatch");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) throw DegenerateInput("pearson: zero variance");
  return clamp_unit(sxy / std::sqrt(sxx * syy));
}

std::vector<double> midranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DegenerateInput("spearman: length mismatch");
  if (x.size() < 3) throw DegenerateInput("spearman needs at least 3 pairs");
  const auto rx = standardized_ranks(x);
  const auto ry = standardized_ranks(y);
  return clamp_unit(std::inner_product(rx.begin(), rx.end(), ry.begin(), 0.0));
}

MantelResult mantel_test(const Rdm& rdm_a, const Rdm& rdm_b, std::size_t n_permutations,
                         std::uint64_t seed, unsigned workers) {
  if (rdm_a.n != rdm_b.n) throw DegenerateInput("mantel: rdms cover different item counts");
  if (rdm_a.n < 4) throw TooFewItems("mantel test needs at least 4 items");
  if (n_permutations < 1) throw DegenerateInput("mantel: at least one permutation required");
  const std::size_t n = rdm_a.n;
  const auto za = standardized_ranks(rdm_a.entries);
  const auto zb = standardized_ranks(rdm_b.entries);

  // rho under relabeling perm: sum over i<j of za(i,j) * zb(perm[i], perm[j]).
  auto permuted_rho = [&](const std::vector<std::size_t>& perm) {
    double acc = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pi = perm[i];
      for (std::size_t j = i + 1; j < n; ++j, ++k) {
        const std::size_t pj = perm[j];
        acc += za[k] * (pi < pj ? zb[condensed_index(pi, pj, n)] : zb[condensed_index(pj, pi, n)]);
      }
    }
    return acc;
  };

  MantelResult result;
  result.seed = seed;
  result.rho_observed =
      clamp_unit(std::inner_product(za.begin(), za.end(), zb.begin(), 0.0));
  const double threshold = result.rho_observed - kTieTolerance;

  // Complete enumeration is offered up to 9 items (9! = 362880 relabelings).
  constexpr std::size_t kMaxEnumerable = 9;
  std::size_t factorial = 1;
  for (std::size_t k = 2; k <= std::min(n, kMaxEnumerable + 1); ++k) factorial *= k;
  const bool enumerate = n <= kMaxEnumerable && n_permutations + 1 >= factorial;

  std::size_t exceed = 0;
  if (enumerate) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    // The first arrangement is the identity; every later one is a genuine relabeling.
    while (std::next_permutation(perm.begin(), perm.end())) {
      if (permuted_rho(perm) >= threshold) ++exceed;
    }
    result.exhaustive = true;
    result.n_permutations = factorial - 1;
  } else {
    std::vector<std::size_t> counts(std::max(1u, workers), 0);
    parallel_chunks(n_permutations, workers, [&](std::size_t begin, std::size_t end, std::size_t c) {
      std::vector<std::size_t> perm(n);
      for (std::size_t b = begin; b < end; ++b) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        CounterRng rng(seed, b);
        rng.shuffle(std::span<std::size_t>(perm));
        if (permuted_rho(perm) >= threshold) ++counts[c];
      }
    });
    exceed = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    result.n_permutations = n_permutations;
  }
  result.p_value = static_cast<double>(1 + exceed) / static_cast<double>(1 + result.n_permutations);
  return result;
}

FdrOutcome bh_fdr(std::span<const double> p_values, double alpha) {
  if (p_values.empty()) throw EmptyInput("bh_fdr: no p-values");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DegenerateInput("bh_fdr: alpha must lie in (0, 1)");
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw DegenerateInput("bh_fdr: p-values must lie in [0, 1]");
  }
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

  std::size_t k_max = 0;  // number of rejections
  for (std::size_t k = 1; k <= m; ++k) {
    if (p_values[order[k - 1]] <= static_cast<double>(k) * alpha / static_cast<double>(m)) k_max = k;
  }

  FdrOutcome out;
  out.p_values.assign(p_values.begin(), p_values.end());
  out.alpha = alpha;
  out.rejected.assign(m, false);
  out.adjusted.assign(m, 1.0);
  for (std::size_t k = 0; k < k_max; ++k) out.rejected[order[k]] = true;
  double running = 1.0;
  for (std::size_t k = m; k >= 1; --k) {
    const double q = p_values[order[k - 1]] * static_cast<double>(m) / static_cast<double>(k);
    running = std::min(running, q);
    out.adjusted[order[k - 1]] = std::min(1.0, running);
  }
  return out;
}

MannWhitneyResult mann_whitney_u(std::span<const double> sample_a, std::span<const double> sample_b,
                                 MwMethod method) {
  const std::size_t na = sample_a.size(), nb = sample_b.size();
  if (na == 0 || nb == 0) throw EmptyInput("mann_whitney_u: empty sample");
  const std::size_t n = na + nb;
  std::vector<double> pooled(sample_a.begin(), sample_a.end());
  pooled.insert(pooled.end(), sample_b.begin(), sample_b.end());
  if (std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); }))
    throw DegenerateInput("mann_whitney_u: all values identical");

  const auto ranks = midranks(pooled);
  const double shift = static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;
  const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(na), 0.0);
  const double mu = static_cast<double>(na) * static_cast<double>(nb) / 2.0;

  MannWhitneyResult out;
  out.u = rank_sum_a - shift;
  const double observed_dev = std::abs(out.u - mu);

  const bool use_exact = method == MwMethod::exact ||
                         (method == MwMethod::automatic && n <= kMannWhitneyExactLimit);
  if (use_exact) {
    if (n > 20) throw DegenerateInput("exact Mann-Whitney limited to 20 observations");
    // Every way of choosing which na of the pooled ranks belong to sample a.
    std::size_t extreme = 0, total = 0;
    const std::uint32_t limit = 1u << n;
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != na) continue;
      double rs = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) rs += ranks[i];
      }
      ++total;
      if (std::abs(rs - shift - mu) >= observed_dev - 1e-9) ++extreme;
    }
    out.exact = true;
    out.p_two_sided = static_cast<double>(extreme) / static_cast<double>(total);
    return out;
  }

  double tie_term = 0.0;
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double dn = static_cast<double>(n);
  const double var = static_cast<double>(na) * static_cast<double>(nb) / 12.0 *
                     ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  const double z = std::max(0.0, observed_dev - 0.5) / std::sqrt(var);
  out.p_two_sided = std::min(1.0, 2.0 * normal_sf(z));
  return out;
}

double cohens_d(std::span<const double> sample_a, std::span<const double> sample_b) {
  const std::size_t na = sample_a.size(), nb = sample_b.size();
  if (na < 2 || nb < 2) throw DegenerateInput("cohens_d needs at least 2 values per sample");
  const double pooled = (static_cast<double>(na - 1) * variance(sample_a) +
                         static_cast<double>(nb - 1) * variance(sample_b)) /
                        static_cast<double>(na + nb - 2);
  if (pooled <= 0.0) throw DegenerateInput("cohens_d: pooled variance is zero");
  return (mean(sample_a) - mean(sample_b)) / std::sqrt(pooled);
}

Interval bootstrap_ci(std::span<const double> values, const Aggregator& statistic,
                      std::size_t n_resamples, std::uint64_t seed) {
  if (values.empty()) throw EmptyInput("bootstrap_ci: no values");
  if (n_resamples == 0) throw DegenerateInput("bootstrap_ci: zero resamples");
  CounterRng rng(seed);
  std::vector<double> resample(values.size());
  std::vector<double> stats(n_resamples);
  for (auto& s : stats) {
    for (auto& v : resample) v = values[rng.below(values.size())];
    s = statistic(resample);
  }
  std::sort(stats.begin(), stats.end());
  const auto b = static_cast<double>(n_resamples);
  const auto lo_idx = static_cast<std::size_t>(std::floor(0.025 * b));
  const auto hi_idx = static_cast<std::size_t>(std::max(1.0, std::ceil(0.975 * b))) - 1;
  return {stats[std::min(lo_idx, n_resamples - 1)], stats[std::min(hi_idx, n_resamples - 1)]};
}

CorrelationTest spearman_permutation_test(std::span<const double> x, std::span<const double> y,
                                          std::size_t n_permutations, std::uint64_t seed) {
  CorrelationTest out;
  out.rho = spearman_rho(x, y);
  const auto zx = standardized_ranks(x);
  const auto zy = standardized_ranks(y);
  const std::size_t n = x.size();
  const double threshold = std::abs(out.rho) - kTieTolerance;
  auto rho_of = [&](const std::vector<std::size_t>& perm) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += zx[i] * zy[perm[i]];
    return acc;
  };
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::size_t extreme = 0;
  if (n <= 8) {
    std::size_t total = 0;
    do {
      ++total;
      if (std::abs(rho_of(perm)) >= threshold) ++extreme;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.exhaustive = true;
    out.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    return out;
  }
  if (n_permutations == 0) throw DegenerateInput("permutation test needs permutations");
  for (std::size_t b = 0; b < n_permutations; ++b) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    CounterRng rng(seed, b);
    rng.shuffle(std::span<std::size_t>(perm));
    if (std::abs(rho_of(perm)) >= threshold) ++extreme;
  }
  out.p_value = static_cast<double>(1 + extreme) / static_cast<double>(1 + n_permutations);
  return out;
}

}  // namespace cpgeo::stats
