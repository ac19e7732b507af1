#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpgeo/data_model.hpp"
#include "cpgeo/fitting.hpp"
#include "cpgeo/geometry.hpp"
#include "cpgeo/stats.hpp"

namespace cpgeo::paradigms {

// Stimulus set used for category-dependent analyses: the structural
// boundary, or the control position when a control condition has none.
StimulusSet analysis_stimuli(const StimulusSet& stimuli);

// Layers analysed when none are requested: all of them.
std::vector<std::size_t> resolve_layers(const HiddenStateBundle& bundle,
                                        const std::vector<std::size_t>& requested);

// Default "primary" subset: every non-embedding layer (all layers for L = 1).
std::vector<std::size_t> default_primary_layers(std::size_t n_layers);

// ---------------------------------------------------------------------------
// RSA

std::vector<TheoreticalRdmSpec> default_model_specs(DomainKind domain, double lambda, double gamma);
// continuous_log for magnitudes, ordinal_continuous for nonce sets.
ModelKind default_baseline(DomainKind domain);

struct RsaOptions {
  Metric metric = Metric::cosine;
  std::vector<TheoreticalRdmSpec> specs;  // empty: default_model_specs
  std::optional<ModelKind> baseline;      // empty: default_baseline
  std::size_t permutations = 10000;
  std::uint64_t seed = 42;
  double fdr_alpha = 0.05;
  double lambda = 1.0;
  double gamma = 1.0;
  std::vector<std::size_t> layers;          // empty: all
  std::vector<std::size_t> primary_layers;  // empty: default_primary_layers
  unsigned workers = 1;
};

struct RsaLayerResult {
  std::size_t layer = 0;
  std::map<ModelKind, double> rho_by_model;
  std::map<ModelKind, double> mantel_p_by_model;
  std::map<ModelKind, bool> fdr_significant;
  double cp_advantage = 0.0;  // rho(cp_additive) - rho(baseline)
  bool add_vs_mult = false;   // rho(cp_additive) > rho(cp_multiplicative)
};

struct RsaRun {
  std::vector<RsaLayerResult> layers;
  ModelKind baseline = ModelKind::continuous_log;
  std::vector<std::size_t> primary_layers;
  std::size_t cp_wins = 0;         // primary layers with cp_advantage > 0
  double mean_cp_advantage = 0.0;  // over primary layers
  std::size_t add_over_mult = 0;   // primary layers with add_vs_mult
  std::map<ModelKind, double> max_rho;
};

RsaRun run_rsa(const HiddenStateBundle& bundle, const RsaOptions& options);

// ---------------------------------------------------------------------------
// H4 hierarchical regression

struct H4LayerResult {
  std::size_t layer = 0;
  fitting::HierarchicalRegressionResult regression;
  bool fdr_significant = false;
};

struct H4Run {
  std::vector<H4LayerResult> layers;
  std::vector<std::size_t> primary_layers;
  std::size_t significant = 0;  // primary layers significant after BH-FDR
  double mean_delta_r2 = 0.0;
  double max_delta_r2 = 0.0;
};

// Empirical pairwise distances, |dlog| and boundary flags over condensed pairs at one layer.
struct PairTable {
  std::vector<double> distances;
  std::vector<double> log_distances;
  std::vector<bool> cross;
};
PairTable pair_table(const Rdm& empirical, const StimulusSet& stimuli);

H4Run run_h4(const HiddenStateBundle& bundle, Metric metric, const std::vector<std::size_t>& layers = {},
             const std::vector<std::size_t>& primary_layers = {}, double fdr_alpha = 0.05,
             unsigned workers = 1);

// ---------------------------------------------------------------------------
// Identification (counterbalanced) and framing agreement

struct FramingCurve {
  std::string framing;
  std::vector<double> values;
  std::vector<double> p_ab;
  std::vector<double> p_ba;
  std::vector<double> p_category_b;  // mean of both orders
  fitting::SigmoidFit fit;
  bool observed_crossing = false;  // curve has points strictly below and above 0.5
  bool boundary_hit = false;       // crossover within one stimulus step of the boundary
};

struct IdentificationResult {
  std::vector<FramingCurve> framings;
  // |x0 - x0'| between framings (NaN when either crossover is undefined), in
  // stimulus units and in stimulus steps.
  std::vector<std::vector<double>> crossover_delta;
  std::vector<std::vector<double>> crossover_delta_steps;
  double step = 1.0;
};

// P(category b) of one identification trial: softmax of the two option logits.
double category_b_probability(const TrialRecord& trial);

// Trials carry the stimulus in value_a; logit_a / logit_b score the
// category-a / category-b options, and `order` says which was listed first.
IdentificationResult run_identification(const std::vector<TrialRecord>& trials, double boundary);

// ---------------------------------------------------------------------------
// Discrimination confidence

struct GroupComparison {
  std::size_t n_cross = 0;
  std::size_t n_within = 0;
  double conf_cross = 0.0;
  double conf_within = 0.0;
  double delta_conf = 0.0;
  double cohens_d = 0.0;
  double mw_p = 1.0;
  bool evaluable = false;
  bool significant = false;
};

struct DiscriminationResult {
  GroupComparison overall;
  std::vector<GroupComparison> per_bin;  // 6 equal-count log-distance bins
  std::size_t significant_bins = 0;
  double alpha = 0.05;
};

DiscriminationResult run_discrimination(std::vector<TrialRecord> trials, double alpha = 0.05);

// ---------------------------------------------------------------------------
// Precision gradient

struct PrecisionLayerResult {
  std::size_t layer = 0;
  std::vector<double> adjacent_distances;
  std::vector<double> precision;
  std::size_t reference_pair = 0;  // index i of the (i, i+1) pair the ratio is taken at
  double boundary_ratio = 0.0;
};

// Reference pair: straddling the boundary, else the control position, else the middle pair.
std::size_t reference_pair(const StimulusSet& stimuli);
std::vector<double> adjacent_distances(const CentroidSet& centroids, Metric metric);
PrecisionLayerResult precision_gradient(const CentroidSet& centroids, const StimulusSet& stimuli,
                                        Metric metric);
std::vector<PrecisionLayerResult> run_precision(const HiddenStateBundle& bundle, Metric metric,
                                                const std::vector<std::size_t>& layers = {});

// ---------------------------------------------------------------------------
// Probe, patch vectors and specificity

struct ProbeLayerResult {
  fitting::ProbeResult probe;
  double pc1_category_rho = 0.0;  // |Spearman(PC1 score, category)|
  double probe_pc1_cosine = 0.0;  // |cos(v_cat, PC1)|
};

ProbeLayerResult probe_layer(const CentroidSet& centroids, const StimulusSet& stimuli,
                             double penalty = fitting::kDefaultRidgePenalty);
std::vector<ProbeLayerResult> run_probe(const HiddenStateBundle& bundle,
                                        const std::vector<std::size_t>& layers = {},
                                        double penalty = fitting::kDefaultRidgePenalty);

inline const std::vector<double> kDefaultAlphas = {0.25, 0.5, 0.75, 1.0};

struct PatchVectorSet {
  std::size_t layer = 0;
  std::vector<double> alpha_levels;
  double weight_norm = 0.0;
  Eigen::VectorXd unit_direction;
  std::vector<Eigen::VectorXd> category_deltas;            // per alpha
  std::vector<std::vector<Eigen::VectorXd>> random_deltas;  // per alpha, n_random each
  bool no_random_controls = false;
};

PatchVectorSet build_patch_vectors(const fitting::ProbeResult& probe, const std::vector<double>& alphas,
                                   std::size_t n_random, std::uint64_t seed);

// |cat_effect| / mean(|random_effects|)
double specificity_ratio(double cat_effect, std::span<const double> random_effects);

// One row of an effects table returned by the patching runner.
struct PatchEffect {
  std::size_t layer = 0;
  double alpha = 0.0;
  std::string direction;  // "category" or "random_<k>"
  double delta_conf = 0.0;
};

struct SpecificityRow {
  std::size_t layer = 0;
  double alpha = 0.0;
  double category_effect = 0.0;
  double mean_random_effect = 0.0;
  double specificity = 0.0;
  bool monotonic = false;  // |category effect| non-decreasing in alpha for this layer
};

std::vector<PatchEffect> read_patch_effects(const std::string& path);
std::vector<SpecificityRow> analyze_patch_effects(const std::vector<PatchEffect>& effects);

// ---------------------------------------------------------------------------
// Local manifold (rotation, phase reset)

// Angle in degrees, folded to [0, 90], between PC1 of centroids
// [position - window, position] and PC1 of [position, position + window].
double manifold_rotation(const CentroidSet& centroids, std::size_t window, std::size_t position);

struct RotationLayerResult {
  std::size_t layer = 0;
  std::size_t boundary_position = 0;
  double boundary_angle = 0.0;
  double mean_other_angle = 0.0;  // positions whose windows do not reach the boundary step
  double max_other_angle = 0.0;
  std::size_t n_other = 0;
};

std::vector<RotationLayerResult> run_rotation(const HiddenStateBundle& bundle, std::size_t window = 4,
                                              const std::vector<std::size_t>& layers = {});

struct PhaseResetResult {
  double boundary_to_nonboundary_ratio = 0.0;
  double mw_p = 1.0;
  std::size_t n_boundary = 0;
  std::size_t n_other = 0;
};

// Adjacent steps within `window` of the boundary-straddling step versus all others.
PhaseResetResult phase_reset(const CentroidSet& centroids, const StimulusSet& stimuli, Metric metric,
                             std::size_t window = 1);

// ---------------------------------------------------------------------------
// Cross-model and cross-layer correlations

struct ModelSummary {
  std::string model_id;
  double identification_slope = 0.0;
  double cp_strength = 0.0;  // mean cp advantage
};

stats::CorrelationTest cross_model_dissociation(const std::vector<ModelSummary>& summaries,
                                                std::size_t permutations = 10000, std::uint64_t seed = 42);

stats::CorrelationTest lambda_beta_correlation(std::span<const double> lambdas, std::span<const double> betas,
                                               std::size_t permutations = 10000, std::uint64_t seed = 42);

struct LambdaBetaLayer {
  std::size_t layer = 0;
  double lambda = 0.0;
  double lambda_rho = 0.0;
  double beta = 0.0;  // Spearman rho of the continuous_log template
};

struct LambdaBetaRun {
  std::vector<LambdaBetaLayer> layers;
  stats::CorrelationTest correlation;
};

LambdaBetaRun run_lambda_beta(const HiddenStateBundle& bundle, Metric metric, std::span<const double> grid,
                              const std::vector<std::size_t>& layers = {}, std::size_t permutations = 10000,
                              std::uint64_t seed = 42, unsigned workers = 1);

// decade-100 advantage / decade-10 advantage.
double boundary_ratio_e4(double decade10_mean_advantage, double decade100_mean_advantage);

}  // namespace cpgeo::paradigms
