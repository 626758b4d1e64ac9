#pragma once

#include "mwmc/model.hpp"

namespace mwmc {

/// Row coherences (n/k * squared row norms) of an orthonormal basis.
struct Coherence {
  Vec per_row;
  double max = 0.0;
};

Coherence coherence(const OrthonormalBasis& basis);

/// Coherence data of one problem instance: the truncated factors and the
/// joint spans [truth, prior] on both sides.
struct CoherenceProfile {
  Vec mu;        // row side
  Vec nu;        // column side
  double eta = 0.0;
  Vec mu_joint;  // span([U, U~])
  Vec nu_joint;  // span([V, V~])
  double eta_joint = 0.0;
};

CoherenceProfile make_coherence_profile(const LowRankModel& model,
                                        const PriorSubspaces& priors);

/// A profile with every coherence equal to one (the isotropic reference).
CoherenceProfile uniform_coherence_profile(Index n);

/// The six closed-form constants controlling the sampling condition.
/// alpha1-3 are the single-weight quantities evaluated at the
/// leading-direction weights and the maximum angles; alpha4-6 are the
/// per-direction versions.
struct AlphaSet {
  double alpha1 = 0.0, alpha2 = 0.0, alpha3 = 0.0;
  double alpha4 = 0.0, alpha5 = 0.0, alpha6 = 0.0;
};

struct SingleWeightAlphas {
  double alpha1 = 0.0, alpha2 = 0.0, alpha3 = 0.0;
};

struct MultiWeightAlphas {
  double alpha4 = 0.0, alpha5 = 0.0, alpha6 = 0.0;
};

SingleWeightAlphas alpha_single(double row_weight, double col_weight,
                                double theta_u_max, double theta_v_max);

MultiWeightAlphas alpha_multi(const WeightSpec& weights,
                              const AngleVector& theta_u,
                              const AngleVector& theta_v);

AlphaSet make_alpha_set(const WeightSpec& weights, const AngleVector& theta_u,
                        const AngleVector& theta_v);

/// Closed-form operator norms of the triangular-core blocks for one side.
/// `l12` matches the spectral norm of the actual block; `l12_variant` is
/// the second printed form, kept for reporting because it disagrees with
/// the block norm whenever the angle and weight are both nontrivial.
struct Lemma4Norms {
  double l11 = 0.0;           // ||L11|| = max delta
  double l12 = 0.0;           // ||L12||, block-consistent form
  double l12_variant = 0.0;   // inconsistent printed variant
  double i_minus_l22 = 0.0;   // ||I - L22||
  double l11_l12 = 0.0;       // ||[L11 L12]||
  double l_prime = 0.0;       // norm of the off-identity defect with L12
  double tail_block = 0.0;    // ||blkdiag(I - L22, I - W2)||
};

Lemma4Norms lemma4_norms(const Vec& main_weights, const Vec& tail_weights,
                         const AngleVector& theta);

/// Per-entry sampling requirement
///   C * max(log(a4 n), 1) * (mu_i + nu_j) r log(n) / n
///     * max(a5^2 (1 + eta_joint/eta), 1)
/// reported clamped at 1. `uniform_alt` is the variant with a5 to the first
/// power and the per-side coherence-ratio sum.
struct SamplingBound {
  Mat p_required;           // clamped to <= 1
  double p_uniform = 0.0;   // max over entries, clamped
  double p_uniform_raw = 0.0;
  double p_uniform_alt = 0.0;
  bool alpha6_feasible = false;  // alpha6 <= 1/4
  bool saturated = false;        // some raw entry exceeded 1
};

SamplingBound sampling_bound(const CoherenceProfile& profile,
                             const AlphaSet& alphas, Index n, Index r,
                             double scale_c = 1.0);

/// The single-weight sampling requirement (uniform over entries), used to
/// pick the scalar weight: C * max(log(a1 n), 1) * eta r log(n) / n
///   * max(1 + eta_joint/eta, 1). Returns +inf when alpha3 > 1/8.
double single_weight_bound(double weight, double theta_u_max,
                           double theta_v_max, const CoherenceProfile& profile,
                           Index n, Index r, double scale_c = 1.0);

struct SingleWeightChoice {
  double weight = 1.0;
  double bound = 0.0;
  bool feasible = true;  // alpha3 <= 1/8 at the returned weight
};

/// Scalar weight (shared by both sides) minimizing single_weight_bound on a
/// 1-D grid; ties resolve toward the larger weight.
SingleWeightChoice optimize_single_weight(double theta_u_max,
                                          double theta_v_max,
                                          const CoherenceProfile& profile,
                                          Index n, Index r, int grid = 256,
                                          double scale_c = 1.0);

struct OptimizerOptions {
  int starts = 64;      // low-discrepancy starts, plus the all-ones start
  int grid = 256;       // per-coordinate line-search resolution
  int max_sweeps = 60;
  bool search_tail = false;  // also optimize the tail weights (default 1)
  double scale_c = 1.0;
};

struct OptimizedWeights {
  WeightSpec weights;
  double bound = 0.0;  // raw uniform bound at the returned weights
  bool feasible = false;
};

/// Multi-start projected coordinate descent on the uniform sampling bound,
/// subject to alpha6 <= 1/4. Never returns a bound worse than all-ones;
/// if no sampled point is feasible, returns all-ones flagged infeasible.
OptimizedWeights optimize_weights(const AngleVector& theta_u,
                                  const AngleVector& theta_v,
                                  const CoherenceProfile& profile, Index n,
                                  Index r, Index prior_dim,
                                  const OptimizerOptions& opts = {});

OptimizedWeights optimize_weights_serial(const AngleVector& theta_u,
                                         const AngleVector& theta_v,
                                         const CoherenceProfile& profile,
                                         Index n, Index r, Index prior_dim,
                                         const OptimizerOptions& opts = {});

/// Angle-only per-direction weights: each entry minimizes its own ratio in
/// alpha4, ignoring the feasibility constraint. Tail weights stay 1.
WeightSpec heuristic_weights(const AngleVector& theta_u,
                             const AngleVector& theta_v, Index prior_dim,
                             double floor = 1.0 / 256.0);

}  // namespace mwmc
