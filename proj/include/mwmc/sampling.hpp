#pragma once

#include <cstdint>
#include <string>

#include "mwmc/linalg.hpp"

namespace mwmc {

/// Bernoulli observation pattern: per-entry probabilities plus one realized
/// mask. Regenerating from the same seed reproduces the mask bit for bit.
struct SamplingPattern {
  Mat probs;  // entries in (0, 1]
  Mat mask;   // realized 0/1 indicators
  std::uint64_t seed = 0;

  Index n() const { return probs.rows(); }
  double fill_fraction() const { return mask.sum() / double(mask.size()); }
};

/// Observed data: zero off the mask, plus the realized noise radius
/// ||mask .* E||_F recorded for the solver's constraint.
struct NoisySample {
  Mat values;
  double noise_bound = 0.0;
};

SamplingPattern draw_pattern(const Mat& probs, std::uint64_t seed);
SamplingPattern draw_pattern_serial(const Mat& probs, std::uint64_t seed);

/// Inverse-probability-weighted observation: (mask/p) .* Z. Unbiased for Z.
Mat apply_r_omega(const Mat& z, const SamplingPattern& pattern);
Mat apply_r_omega_serial(const Mat& z, const SamplingPattern& pattern);

/// Plain mask restriction: mask .* Z.
Mat apply_p_mask(const Mat& z, const SamplingPattern& pattern);

NoisySample observe(const Mat& x, const SamplingPattern& pattern,
                    double noise_sigma, std::uint64_t seed);
NoisySample observe_serial(const Mat& x, const SamplingPattern& pattern,
                           double noise_sigma, std::uint64_t seed);

/// Compact JSON round-trip: {n, seed, probs: "uniform:<p>" | [[...]]}.
/// The mask is not stored; import redraws it from the seed.
std::string pattern_to_json(const SamplingPattern& pattern);
SamplingPattern pattern_from_json(const std::string& text);

}  // namespace mwmc
