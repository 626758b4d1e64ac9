#pragma once

#include <optional>

#include "mwmc/linalg.hpp"

namespace mwmc {

/// Ground truth, split as X = left * diag(sv) * right^T + residual with the
/// residual orthogonal to both factors.
struct LowRankModel {
  Mat matrix;
  OrthonormalBasis left;
  OrthonormalBasis right;
  Vec singular_values;
  Mat residual;

  Index n() const { return matrix.rows(); }
  Index rank() const { return left.dim(); }

  Mat truncated() const {
    return left.cols() * singular_values.asDiagonal() *
           right.cols().transpose();
  }

  /// Rank is an explicit input, never inferred from the spectrum.
  static LowRankModel truncate(const Mat& x, Index rank);
};

/// Prior subspaces stored principal-aligned: column i of each basis pairs
/// with angle i (largest first), so per-direction weights attach cleanly.
struct PriorSubspaces {
  OrthonormalBasis left_prior;
  OrthonormalBasis right_prior;
  AngleVector left_angles;
  AngleVector right_angles;

  Index prior_dim() const { return left_prior.dim(); }

  /// Aligns arbitrary bases of the prior spans against the model factors.
  static PriorSubspaces align(const LowRankModel& model, const Mat& left_raw,
                              const Mat& right_raw);
};

/// Per-direction weights, all in (0, 1]. `main` entries pair with principal
/// angles; `tail` entries weight the extra prior directions.
struct WeightSpec {
  Vec row_main;   // length r
  Vec row_tail;   // length r' - r
  Vec col_main;   // length r
  Vec col_tail;   // length r' - r

  static WeightSpec ones(Index rank, Index prior_dim);
  static WeightSpec uniform(double row_w, double col_w, Index rank,
                            Index prior_dim);
  void validate() const;
};

/// Q = prior * diag(w) * prior^T + P_perp, with its inverse materialized
/// from the same eigenstructure (Q^-1 swaps w for 1/w).
struct WeightedProjector {
  Mat q;
  Mat q_inv;
  std::optional<TransformBundle> bundle;
};

WeightedProjector make_weighted_projector(const OrthonormalBasis& prior,
                                          const Vec& main_weights,
                                          const Vec& tail_weights);

/// Same, plus the adapted frame built against the true factor.
WeightedProjector make_weighted_projector(const OrthonormalBasis& truth,
                                          const OrthonormalBasis& prior,
                                          const Vec& main_weights,
                                          const Vec& tail_weights);

/// Support of the truncated model: matrices sharing its row or column space.
class SupportProjector {
 public:
  SupportProjector(const OrthonormalBasis& left, const OrthonormalBasis& right);

  const Mat& p_left() const { return p_left_; }
  const Mat& p_right() const { return p_right_; }

 private:
  Mat p_left_;
  Mat p_right_;
};

/// P_T(Z) = P_U Z + Z P_V - P_U Z P_V.
Mat project_support(const Mat& z, const SupportProjector& s);
/// P_T_perp(Z) = (I - P_U) Z (I - P_V).
Mat project_support_complement(const Mat& z, const SupportProjector& s);

}  // namespace mwmc
