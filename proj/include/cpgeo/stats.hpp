#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cpgeo/data_model.hpp"

namespace cpgeo::stats {

double mean(std::span<const double> x);
// Sample variance (n - 1 denominator).
double variance(std::span<const double> x);
double pearson(std::span<const double> x, std::span<const double> y);

// 1-based ranks; ties share the average of the ranks they span.
std::vector<double> midranks(std::span<const double> x);

// Pearson correlation of mid-ranks. Throws DegenerateInput when either side is all ties.
double spearman_rho(std::span<const double> x, std::span<const double> y);

struct MantelResult {
  double rho_observed = 0.0;
  double p_value = 1.0;
  std::size_t n_permutations = 0;
  std::uint64_t seed = 0;
  bool exhaustive = false;
};

// One-sided (positive association) Mantel test on Spearman rho. Each
// permutation relabels the items of rdm_b jointly over rows and columns.
// p = (1 + #{rho_perm >= rho_obs}) / (1 + B). When B >= n! - 1 every
// non-identity relabeling is enumerated once and B becomes n! - 1.
MantelResult mantel_test(const Rdm& rdm_a, const Rdm& rdm_b, std::size_t n_permutations,
                         std::uint64_t seed, unsigned workers = 1);

struct FdrOutcome {
  std::vector<double> p_values;
  std::vector<bool> rejected;
  std::vector<double> adjusted;  // BH q-values
  double alpha = 0.05;
};

// Benjamini-Hochberg step-up procedure.
FdrOutcome bh_fdr(std::span<const double> p_values, double alpha);

enum class MwMethod { automatic, exact, asymptotic };

struct MannWhitneyResult {
  double u = 0.0;  // U of sample_a: rank sum of a minus n_a(n_a+1)/2
  double p_two_sided = 1.0;
  bool exact = false;
};

inline constexpr std::size_t kMannWhitneyExactLimit = 12;

// Exact enumeration of group assignments when n_a + n_b <= 12 (automatic),
// otherwise normal approximation with tie-corrected variance and continuity correction.
MannWhitneyResult mann_whitney_u(std::span<const double> sample_a, std::span<const double> sample_b,
                                 MwMethod method = MwMethod::automatic);

// (mean_a - mean_b) / pooled sd with n - 1 weighting.
double cohens_d(std::span<const double> sample_a, std::span<const double> sample_b);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

using Aggregator = std::function<double(std::span<const double>)>;

// Percentile bootstrap (2.5th / 97.5th nearest-rank order statistics).
Interval bootstrap_ci(std::span<const double> values, const Aggregator& statistic,
                      std::size_t n_resamples, std::uint64_t seed);

struct CorrelationTest {
  double rho = 0.0;
  double p_value = 1.0;
  bool exhaustive = false;
};

// Spearman rho with a two-sided permutation p-value. Exact enumeration for
// n <= 8, otherwise `n_permutations` seeded shuffles.
CorrelationTest spearman_permutation_test(std::span<const double> x, std::span<const double> y,
                                          std::size_t n_permutations, std::uint64_t seed);

}  // namespace cpgeo::stats
