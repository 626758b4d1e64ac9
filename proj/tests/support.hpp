// Shared helpers for test instance generation.
#pragma once

#include "mwmc/linalg.hpp"
#include "mwmc/model.hpp"
#include "mwmc/rng.hpp"

namespace mwmc::testing {

inline double urand(std::uint64_t seed, std::uint64_t k, std::uint64_t stream) {
  return rng::uniform01(seed, k, 0, rng::kTestStream + 10 + stream);
}

/// Angles in degrees drawn from [lo, hi], returned sorted non-increasing.
inline AngleVector random_angles(Index r, double lo_deg, double hi_deg,
                                 std::uint64_t seed) {
  Vec deg(r);
  for (Index i = 0; i < r; ++i)
    deg(i) = lo_deg + (hi_deg - lo_deg) * urand(seed, i, 0);
  return AngleVector::from_degrees(deg);
}

inline Vec random_weights(Index k, double lo, std::uint64_t seed,
                          std::uint64_t stream) {
  Vec w(k);
  for (Index i = 0; i < k; ++i)
    w(i) = lo + (1.0 - lo) * urand(seed, i, stream);
  return w;
}

struct TransformInstance {
  OrthonormalBasis truth;
  OrthonormalBasis prior;
  AngleVector theta;
  Vec main_weights;
  Vec tail_weights;
};

/// Random aligned instance; a fraction of the angles can be exactly zero to
/// exercise the degenerate construction.
inline TransformInstance random_transform_instance(Index n, Index r, Index rp,
                                                   std::uint64_t seed,
                                                   double zero_angle_prob = 0.1) {
  OrthonormalBasis truth = random_orthonormal(n, r, seed);
  Vec deg(r);
  for (Index i = 0; i < r; ++i) {
    const bool zero = urand(seed, i, 1) < zero_angle_prob;
    deg(i) = zero ? 0.0 : 0.5 + 88.5 * urand(seed, i, 2);
  }
  AngleVector theta = AngleVector::from_degrees(deg);
  OrthonormalBasis prior =
      build_prior_basis(truth, theta, rp, rng::combine(seed, 7));
  return TransformInstance{std::move(truth), std::move(prior),
                           std::move(theta),
                           random_weights(r, 0.05, seed, 3),
                           random_weights(rp - r, 0.05, seed, 4)};
}

/// Ground-truth Q of the weighted projector, straight from the definition.
inline Mat direct_q(const OrthonormalBasis& prior, const Vec& main_w,
                    const Vec& tail_w) {
  const Index n = prior.ambient();
  Vec w(prior.dim());
  w << main_w, tail_w;
  return Mat::Identity(n, n) +
         prior.cols() * (w.array() - 1.0).matrix().asDiagonal() *
             prior.cols().transpose();
}

/// Seeded random rank-r ground truth (Gaussian factors).
inline Mat random_low_rank(Index n, Index r, std::uint64_t seed) {
  Mat a(n, r), b(n, r);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < r; ++j) {
      a(i, j) = rng::gaussian(seed, i, j, rng::kTestStream + 20);
      b(i, j) = rng::gaussian(seed, i, j, rng::kTestStream + 21);
    }
  return a * b.transpose();
}

}  // namespace mwmc::testing
