#include "mwmc/sampling.hpp"

#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mwmc/rng.hpp"

namespace mwmc {

namespace {

void validate_probs(const Mat& probs) {
  if (probs.rows() != probs.cols())
    throw std::invalid_argument("draw_pattern: probabilities must be square");
  for (Index i = 0; i < probs.rows(); ++i)
    for (Index j = 0; j < probs.cols(); ++j)
      if (!(probs(i, j) > 0.0 && probs(i, j) <= 1.0))
        throw std::invalid_argument("draw_pattern: probability outside (0, 1]");
}

inline double mask_entry(const Mat& probs, std::uint64_t seed, Index i,
                         Index j) {
  return rng::uniform01(seed, static_cast<std::uint64_t>(i),
                        static_cast<std::uint64_t>(j), rng::kMask) < probs(i, j)
             ? 1.0
             : 0.0;
}

void check_shape(const Mat& z, const SamplingPattern& pattern,
                 const char* what) {
  if (z.rows() != pattern.mask.rows() || z.cols() != pattern.mask.cols())
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

}  // namespace

SamplingPattern draw_pattern(const Mat& probs, std::uint64_t seed) {
  validate_probs(probs);
  const Index n = probs.rows();
  Mat mask(n, n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) mask(i, j) = mask_entry(probs, seed, i, j);
  return SamplingPattern{probs, std::move(mask), seed};
}

SamplingPattern draw_pattern_serial(const Mat& probs, std::uint64_t seed) {
  validate_probs(probs);
  const Index n = probs.rows();
  Mat mask(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) mask(i, j) = mask_entry(probs, seed, i, j);
  return SamplingPattern{probs, std::move(mask), seed};
}

Mat apply_r_omega(const Mat& z, const SamplingPattern& pattern) {
  check_shape(z, pattern, "apply_r_omega");
  const Index n = z.rows();
  Mat out(n, z.cols());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < z.cols(); ++j)
      out(i, j) = pattern.mask(i, j) / pattern.probs(i, j) * z(i, j);
  return out;
}

Mat apply_r_omega_serial(const Mat& z, const SamplingPattern& pattern) {
  check_shape(z, pattern, "apply_r_omega");
  return (pattern.mask.array() / pattern.probs.array() * z.array()).matrix();
}

Mat apply_p_mask(const Mat& z, const SamplingPattern& pattern) {
  check_shape(z, pattern, "apply_p_mask");
  return (pattern.mask.array() * z.array()).matrix();
}

namespace {

NoisySample observe_impl(const Mat& x, const SamplingPattern& pattern,
                         double noise_sigma, std::uint64_t seed,
                         bool parallel) {
  if (noise_sigma < 0.0)
    throw std::invalid_argument("observe: noise_sigma must be >= 0");
  check_shape(x, pattern, "observe");
  const Index n = x.rows();
  Mat values(n, n);
  Vec row_sq = Vec::Zero(n);
  if (noise_sigma == 0.0) {
    values = (pattern.mask.array() * x.array()).matrix();
    return NoisySample{std::move(values), 0.0};
  }
#pragma omp parallel for schedule(static) if (parallel)
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double e =
          noise_sigma * rng::gaussian(seed, static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(j),
                                      rng::kNoise);
      const double m = pattern.mask(i, j);
      values(i, j) = m * (x(i, j) + e);
      acc += m * e * m * e;
    }
    row_sq(i) = acc;
  }
  // Fixed reduction order so serial and parallel runs agree bitwise.
  double total = 0.0;
  for (Index i = 0; i < n; ++i) total += row_sq(i);
  return NoisySample{std::move(values), std::sqrt(total)};
}

}  // namespace

NoisySample observe(const Mat& x, const SamplingPattern& pattern,
                    double noise_sigma, std::uint64_t seed) {
  return observe_impl(x, pattern, noise_sigma, seed, true);
}

NoisySample observe_serial(const Mat& x, const SamplingPattern& pattern,
                           double noise_sigma, std::uint64_t seed) {
  return observe_impl(x, pattern, noise_sigma, seed, false);
}

std::string pattern_to_json(const SamplingPattern& pattern) {
  nlohmann::json j;
  j["n"] = pattern.n();
  j["seed"] = pattern.seed;
  const double p0 = pattern.probs(0, 0);
  if ((pattern.probs.array() == p0).all()) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "uniform:%.17g", p0);
    j["probs"] = buf;
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < pattern.n(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Index jx = 0; jx < pattern.n(); ++jx) row.push_back(pattern.probs(i, jx));
      rows.push_back(std::move(row));
    }
    j["probs"] = std::move(rows);
  }
  return j.dump();
}

SamplingPattern pattern_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const Index n = j.at("n").get<Index>();
  const std::uint64_t seed = j.at("seed").get<std::uint64_t>();
  Mat probs(n, n);
  const auto& p = j.at("probs");
  if (p.is_string()) {
    const std::string s = p.get<std::string>();
    if (s.rfind("uniform:", 0) != 0)
      throw std::invalid_argument("pattern_from_json: bad probs string");
    probs.setConstant(std::stod(s.substr(8)));
  } else {
    for (Index i = 0; i < n; ++i)
      for (Index jx = 0; jx < n; ++jx) probs(i, jx) = p.at(i).at(jx).get<double>();
  }
  return draw_pattern(probs, seed);
}

}  // namespace mwmc
