#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace mwmc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Centralized tolerance constants.
inline constexpr double kOrthoTol = 1e-10;   // orthonormality defects we produce
inline constexpr double kNormTol = 1e-9;     // spectral-norm identities
inline constexpr double kGramCheckTol = 1e-8;  // accepted defect on inputs

/// Result of a full SVD with a deterministic sign convention: the
/// largest-magnitude entry of every left singular vector is non-negative
/// (first such index wins on ties), with the matching right vector flipped.
struct SvdResult {
  Mat U;
  Vec singular_values;  // non-increasing
  Mat V;
};

SvdResult full_svd(const Mat& a);

double spectral_norm(const Mat& a);
double nuclear_norm(const Mat& a);

/// n x k matrix with orthonormal columns. Construction rejects inputs whose
/// Gram defect exceeds kGramCheckTol.
class OrthonormalBasis {
 public:
  explicit OrthonormalBasis(Mat columns);

  const Mat& cols() const { return cols_; }
  Index ambient() const { return cols_.rows(); }
  Index dim() const { return cols_.cols(); }

  /// Orthogonal projector onto the spanned subspace.
  Mat projector() const { return cols_ * cols_.transpose(); }

 private:
  Mat cols_;
};

/// Principal angles in radians, stored non-increasing (index 0 is the
/// largest angle), each in [0, pi/2].
class AngleVector {
 public:
  explicit AngleVector(Vec radians);

  static AngleVector from_degrees(const Vec& degrees);

  const Vec& radians() const { return radians_; }
  Vec degrees() const;
  Index size() const { return radians_.size(); }
  double operator[](Index i) const { return radians_(i); }
  double max_angle() const { return radians_.size() ? radians_(0) : 0.0; }

 private:
  Vec radians_;
};

/// Adapted frame for a weighted projector Q = U~ diag(w) U~^T + P_perp:
/// Q = frame * rotation * core * frame^T with orthonormal frame/rotation and
/// block upper-triangular core. Blocks of core, in order, act on the true
/// directions (r), their in-plane complements (r), the prior tail (r'-r) and
/// the untouched remainder.
struct TransformBundle {
  Mat frame;     // n x n orthonormal
  Mat rotation;  // n x n orthonormal
  Mat core;      // n x n block upper-triangular, spectral norm 1
  Vec delta;     // per-direction normalizer sqrt(w^2 cos^2 + sin^2)
  Vec cosines;   // cos of the principal angles, non-decreasing
  Vec sines;     // matching sines
  Index rank = 0;       // r
  Index prior_dim = 0;  // r'

  Mat rebuild_q() const { return frame * rotation * core * frame.transpose(); }

  Mat core_block(Index row, Index col) const;
};

/// Principal angles between span(a) and span(b); requires dim(a) <= dim(b).
AngleVector principal_angles(const OrthonormalBasis& a,
                             const OrthonormalBasis& b);

/// Builds an r'-dimensional basis forming the requested principal angles
/// with `truth`: truth^T * result = [diag(cos theta) | 0]. Complement
/// directions are seeded-random inside span(truth)^perp; zero angles copy
/// the true direction exactly.
OrthonormalBasis build_prior_basis(const OrthonormalBasis& truth,
                                   const AngleVector& theta, Index prior_dim,
                                   std::uint64_t seed);

/// Builds the adapted frame for one side of the weighted projector. The
/// prior basis is aligned internally (rotation within each span), so any
/// bases of the two subspaces are accepted. Weights must lie in (0, 1].
TransformBundle build_transform(const OrthonormalBasis& truth,
                                const OrthonormalBasis& prior,
                                const Vec& main_weights,
                                const Vec& tail_weights);

/// Seeded random orthonormal matrix (Gaussian ensemble + Householder QR,
/// R-diagonal signs fixed).
OrthonormalBasis random_orthonormal(Index n, Index k, std::uint64_t seed);

namespace detail {
void validate_weights(const Vec& w, const char* what);
}

}  // namespace mwmc
