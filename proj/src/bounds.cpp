#include "mwmc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mwmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sin^2 derived as 1 - cos^2 so that weight-one ratios collapse to exactly
// 1.0 in floating point (the Remark-1 identities are tested exactly).
struct AngleParts {
  double c2, s2;
};

AngleParts parts(double theta) {
  const double c = std::cos(theta);
  const double c2 = c * c;
  return {c2, 1.0 - c2};
}

double ratio4(double w, const AngleParts& a) {
  const double w2 = w * w;
  return (w2 * w2 * a.c2 + a.s2) / (w2 * a.c2 + a.s2);
}

double delta2(double w, const AngleParts& a) { return w * w * a.c2 + a.s2; }

}  // namespace

Coherence coherence(const OrthonormalBasis& basis) {
  const Index n = basis.ambient();
  const double scale = double(n) / double(basis.dim());
  Vec per_row = scale * basis.cols().rowwise().squaredNorm();
  const double max = per_row.maxCoeff();
  return Coherence{std::move(per_row), max};
}

namespace {

// Coherences of span([a, b]): rank-revealing basis of the concatenation.
Vec joint_coherence(const OrthonormalBasis& a, const OrthonormalBasis& b) {
  Mat stacked(a.ambient(), a.dim() + b.dim());
  stacked << a.cols(), b.cols();
  Eigen::BDCSVD<Mat> svd(stacked, Eigen::ComputeThinU);
  const Vec& sv = svd.singularValues();
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-10 * sv(0)) ++rank;
  const Mat basis = svd.matrixU().leftCols(rank);
  return (double(a.ambient()) / double(rank)) *
         basis.rowwise().squaredNorm();
}

}  // namespace

CoherenceProfile make_coherence_profile(const LowRankModel& model,
                                        const PriorSubspaces& priors) {
  CoherenceProfile p;
  p.mu = coherence(model.left).per_row;
  p.nu = coherence(model.right).per_row;
  p.eta = std::max(p.mu.maxCoeff(), p.nu.maxCoeff());
  p.mu_joint = joint_coherence(model.left, priors.left_prior);
  p.nu_joint = joint_coherence(model.right, priors.right_prior);
  p.eta_joint = std::max(p.mu_joint.maxCoeff(), p.nu_joint.maxCoeff());
  return p;
}

CoherenceProfile uniform_coherence_profile(Index n) {
  CoherenceProfile p;
  p.mu = Vec::Ones(n);
  p.nu = Vec::Ones(n);
  p.eta = 1.0;
  p.mu_joint = Vec::Ones(n);
  p.nu_joint = Vec::Ones(n);
  p.eta_joint = 1.0;
  return p;
}

SingleWeightAlphas alpha_single(double row_weight, double col_weight,
                                double theta_u_max, double theta_v_max) {
  if (!(row_weight > 0.0 && row_weight <= 1.0) ||
      !(col_weight > 0.0 && col_weight <= 1.0))
    throw std::invalid_argument("alpha_single: weights must lie in (0, 1]");
  const AngleParts u = parts(theta_u_max);
  const AngleParts v = parts(theta_v_max);
  const double lam = row_weight, gam = col_weight;

  SingleWeightAlphas a;
  a.alpha1 = std::sqrt(ratio4(lam, u)) * std::sqrt(ratio4(lam, v));
  const double du = delta2(lam, u);
  const double dv = delta2(gam, v);
  a.alpha2 = (std::sqrt(du / dv) + std::sqrt(dv / du)) *
             (std::sqrt(lam * lam * lam * lam * u.c2 + u.s2) +
              std::sqrt(gam * gam * gam * gam * v.c2 + v.s2));
  a.alpha3 = 3.0 * std::sqrt(1.0 - lam * lam) * std::sqrt(u.s2) /
                 (2.0 * std::sqrt(du)) +
             3.0 * std::sqrt(1.0 - gam * gam) * std::sqrt(v.s2) /
                 (2.0 * std::sqrt(dv));
  return a;
}

namespace {

MultiWeightAlphas alpha_multi_impl(const Vec& lam1, const Vec& lam2,
                                   const Vec& gam1, const Vec& gam2,
                                   const AngleVector& theta_u,
                                   const AngleVector& theta_v) {
  const Index r = theta_u.size();
  double max_ratio_u = 0.0, max_ratio_v = 0.0;
  double max_delta2_u = 0.0, max_delta2_v = 0.0;
  double max_a6_u = 0.0, max_a6_v = 0.0;
  double max_gap_u = -kInf, max_gap_v = -kInf;
  for (Index i = 0; i < r; ++i) {
    const AngleParts u = parts(theta_u[i]);
    const AngleParts v = parts(theta_v[i]);
    const double lu = lam1(i), gv = gam1(i);
    max_ratio_u = std::max(max_ratio_u, ratio4(lu, u));
    max_ratio_v = std::max(max_ratio_v, ratio4(gv, v));
    const double du2 = delta2(lu, u), dv2 = delta2(gv, v);
    max_delta2_u = std::max(max_delta2_u, du2);
    max_delta2_v = std::max(max_delta2_v, dv2);
    const double one_m_lu2 = 1.0 - lu * lu;
    const double one_m_gv2 = 1.0 - gv * gv;
    max_a6_u = std::max(max_a6_u, (one_m_lu2 * one_m_lu2 * u.c2 + u.s2) / du2);
    max_a6_v = std::max(max_a6_v, (one_m_gv2 * one_m_gv2 * v.c2 + v.s2) / dv2);
    max_gap_u = std::max(max_gap_u, lu / std::sqrt(du2) - 1.0);
    max_gap_v = std::max(max_gap_v, gv / std::sqrt(dv2) - 1.0);
  }
  for (Index i = 0; i < lam2.size(); ++i)
    max_gap_u = std::max(max_gap_u, lam2(i) - 1.0);
  for (Index i = 0; i < gam2.size(); ++i)
    max_gap_v = std::max(max_gap_v, gam2(i) - 1.0);

  MultiWeightAlphas a;
  a.alpha4 = std::sqrt(max_ratio_u) * std::sqrt(max_ratio_v);
  a.alpha5 = std::sqrt(max_delta2_u) * std::sqrt(max_ratio_v) +
             std::sqrt(max_delta2_v) * std::sqrt(max_ratio_u);
  a.alpha6 = std::sqrt(max_a6_u) * std::sqrt(max_a6_v) - max_gap_u - max_gap_v;
  return a;
}

}  // namespace

MultiWeightAlphas alpha_multi(const WeightSpec& weights,
                              const AngleVector& theta_u,
                              const AngleVector& theta_v) {
  weights.validate();
  if (weights.row_main.size() != theta_u.size() ||
      weights.col_main.size() != theta_v.size() ||
      theta_u.size() != theta_v.size())
    throw std::invalid_argument("alpha_multi: angle/weight sizes disagree");
  return alpha_multi_impl(weights.row_main, weights.row_tail, weights.col_main,
                          weights.col_tail, theta_u, theta_v);
}

AlphaSet make_alpha_set(const WeightSpec& weights, const AngleVector& theta_u,
                        const AngleVector& theta_v) {
  const SingleWeightAlphas s =
      alpha_single(weights.row_main(0), weights.col_main(0),
                   theta_u.max_angle(), theta_v.max_angle());
  const MultiWeightAlphas m = alpha_multi(weights, theta_u, theta_v);
  return AlphaSet{s.alpha1, s.alpha2, s.alpha3, m.alpha4, m.alpha5, m.alpha6};
}

Lemma4Norms lemma4_norms(const Vec& main_weights, const Vec& tail_weights,
                         const AngleVector& theta) {
  detail::validate_weights(main_weights, "lemma4_norms");
  detail::validate_weights(tail_weights, "lemma4_norms");
  if (main_weights.size() != theta.size())
    throw std::invalid_argument("lemma4_norms: weight/angle sizes disagree");

  Lemma4Norms out;
  double max_dprime = 0.0;
  double max_variant = 0.0, max_row2 = 0.0;
  for (Index i = 0; i < theta.size(); ++i) {
    const AngleParts a = parts(theta[i]);
    const double w = main_weights(i);
    const double d2 = delta2(w, a);
    const double d = std::sqrt(d2);
    const double one_m_w2 = 1.0 - w * w;
    out.l11 = std::max(out.l11, d);
    out.l12 = std::max(out.l12,
                       std::abs(one_m_w2) * std::sqrt(a.c2 * a.s2) / d);
    max_variant =
        std::max(max_variant, (one_m_w2 * one_m_w2 * a.c2 + a.s2) / d2);
    out.i_minus_l22 = std::max(out.i_minus_l22, 1.0 - w / d);
    max_row2 = std::max(max_row2, (w * w * w * w * a.c2 + a.s2) / d2);
    const double gap = 1.0 - w / d;
    max_dprime = std::max(
        max_dprime, gap * gap + one_m_w2 * one_m_w2 * a.c2 * a.s2 / d2);
  }
  out.l12_variant = std::sqrt(max_variant);
  out.l11_l12 = std::sqrt(max_row2);
  double tail_gap = 0.0;
  double tail_d2 = 0.0;
  for (Index i = 0; i < tail_weights.size(); ++i) {
    const double g = 1.0 - tail_weights(i);
    tail_gap = std::max(tail_gap, g);
    tail_d2 = std::max(tail_d2, g * g);
  }
  out.l_prime = std::sqrt(std::max(max_dprime, tail_d2));
  out.tail_block = std::max(out.i_minus_l22, tail_gap);
  return out;
}

SamplingBound sampling_bound(const CoherenceProfile& profile,
                             const AlphaSet& alphas, Index n, Index r,
                             double scale_c) {
  if (profile.mu.size() != n || profile.nu.size() != n)
    throw std::invalid_argument("sampling_bound: profile size != n");
  const double log_factor = std::max(std::log(alphas.alpha4 * double(n)), 1.0);
  const double joint_ratio = profile.eta_joint / profile.eta;
  const double weight_factor =
      std::max(alphas.alpha5 * alphas.alpha5 * (1.0 + joint_ratio), 1.0);
  const double per_entry_scale =
      scale_c * log_factor * double(r) * std::log(double(n)) / double(n);

  SamplingBound out;
  out.p_required.resize(n, n);
  double raw_max = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double raw =
          per_entry_scale * (profile.mu(i) + profile.nu(j)) * weight_factor;
      raw_max = std::max(raw_max, raw);
      out.p_required(i, j) = std::min(raw, 1.0);
    }
  out.p_uniform_raw = raw_max;
  out.p_uniform = std::min(raw_max, 1.0);
  out.saturated = raw_max > 1.0;
  out.alpha6_feasible = alphas.alpha6 <= 0.25;

  double ratio_sum = 1.0;
  ratio_sum += (profile.mu_joint.array() / profile.mu.array()).maxCoeff();
  ratio_sum += (profile.nu_joint.array() / profile.nu.array()).maxCoeff();
  const double alt_factor = std::max(alphas.alpha5 * ratio_sum, 1.0);
  const double base_max = profile.mu.maxCoeff() + profile.nu.maxCoeff();
  out.p_uniform_alt = per_entry_scale * base_max * alt_factor;
  return out;
}

double single_weight_bound(double weight, double theta_u_max,
                           double theta_v_max, const CoherenceProfile& profile,
                           Index n, Index r, double scale_c) {
  const SingleWeightAlphas a =
      alpha_single(weight, weight, theta_u_max, theta_v_max);
  if (a.alpha3 > 0.125) return kInf;
  const double log_factor = std::max(std::log(a.alpha1 * double(n)), 1.0);
  const double joint = std::max(1.0 + profile.eta_joint / profile.eta, 1.0);
  return scale_c * log_factor * profile.eta * double(r) *
         std::log(double(n)) / double(n) * joint;
}

SingleWeightChoice optimize_single_weight(double theta_u_max,
                                          double theta_v_max,
                                          const CoherenceProfile& profile,
                                          Index n, Index r, int grid,
                                          double scale_c) {
  SingleWeightChoice best;
  best.bound = kInf;
  best.feasible = false;
  for (int k = 1; k <= grid; ++k) {
    const double w = double(k) / double(grid);
    const double b =
        single_weight_bound(w, theta_u_max, theta_v_max, profile, n, r,
                            scale_c);
    if (b < best.bound || (b == best.bound && w > best.weight)) {
      best.weight = w;
      best.bound = b;
      best.feasible = std::isfinite(b);
    }
  }
  if (!best.feasible) {
    best.weight = 1.0;
    best.bound =
        single_weight_bound(1.0, theta_u_max, theta_v_max, profile, n, r,
                            scale_c);
    best.feasible = std::isfinite(best.bound);
  }
  return best;
}

WeightSpec heuristic_weights(const AngleVector& theta_u,
                             const AngleVector& theta_v, Index prior_dim,
                             double floor) {
  const Index r = theta_u.size();
  WeightSpec w = WeightSpec::ones(r, prior_dim);
  for (Index i = 0; i < r; ++i) {
    const double su = std::sin(theta_u[i]);
    const double sv = std::sin(theta_v[i]);
    w.row_main(i) = std::clamp(std::sqrt(su / (1.0 + su)), floor, 1.0);
    w.col_main(i) = std::clamp(std::sqrt(sv / (1.0 + sv)), floor, 1.0);
  }
  return w;
}

namespace {

// State shared by the coordinate-descent runs: the objective only depends on
// the weights through the alpha factors, the rest is precomputed.
struct BoundObjective {
  const AngleVector& theta_u;
  const AngleVector& theta_v;
  Index n, r, prior_dim;
  double per_entry_scale_base;  // C * r log(n)/n * max_ij(mu_i + nu_j)
  double joint_ratio;           // eta_joint / eta

  double operator()(const Vec& lam1, const Vec& lam2, const Vec& gam1,
                    const Vec& gam2, bool* feasible) const {
    const MultiWeightAlphas a =
        alpha_multi_impl(lam1, lam2, gam1, gam2, theta_u, theta_v);
    *feasible = a.alpha6 <= 0.25;
    const double log_factor = std::max(std::log(a.alpha4 * double(n)), 1.0);
    const double weight_factor =
        std::max(a.alpha5 * a.alpha5 * (1.0 + joint_ratio), 1.0);
    return per_entry_scale_base * log_factor * weight_factor;
  }
};

struct Candidate {
  Vec values;  // concatenated search coordinates
  double bound = kInf;
  bool feasible = false;
};

// Radical-inverse (Halton) low-discrepancy point, one prime base per axis.
double radical_inverse(int index, int base) {
  double result = 0.0, f = 1.0 / base;
  for (int i = index; i > 0; i /= base) {
    result += f * (i % base);
    f /= base;
  }
  return result;
}

int nth_prime(int k) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                               37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
                               83, 89, 97, 101, 103, 107, 109, 113, 127, 131};
  return primes[k % (sizeof(primes) / sizeof(primes[0]))];
}

Candidate descend(Vec start, const BoundObjective& obj, Index r, Index tail,
                  bool search_tail, int grid, int max_sweeps) {
  const Index dim = start.size();
  Vec lam1(r), gam1(r), lam2(tail), gam2(tail);
  auto unpack = [&](const Vec& x) {
    lam1 = x.segment(0, r);
    gam1 = x.segment(r, r);
    if (search_tail && tail > 0) {
      lam2 = x.segment(2 * r, tail);
      gam2 = x.segment(2 * r + tail, tail);
    } else {
      lam2.setOnes();
      gam2.setOnes();
    }
  };

  Vec x = std::move(start);
  unpack(x);
  bool feasible = false;
  double value = obj(lam1, lam2, gam1, gam2, &feasible);
  double score = feasible ? value : kInf;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (Index c = 0; c < dim; ++c) {
      const double orig = x(c);
      double best_w = orig;
      double best_score = score;
      for (int k = 1; k <= grid; ++k) {
        const double w = double(k) / double(grid);
        if (w == orig) continue;
        x(c) = w;
        unpack(x);
        bool f = false;
        const double v = obj(lam1, lam2, gam1, gam2, &f);
        const double s = f ? v : kInf;
        if (s < best_score || (s == best_score && w > best_w)) {
          best_score = s;
          best_w = w;
        }
      }
      x(c) = best_w;
      score = best_score;
      if (best_w != orig) moved = true;
    }
    if (!moved) break;
  }
  unpack(x);
  bool f = false;
  const double v = obj(lam1, lam2, gam1, gam2, &f);
  return Candidate{std::move(x), v, f};
}

bool better_candidate(const Candidate& a, const Candidate& b) {
  // Feasible first, then smaller bound, then larger weights.
  if (a.feasible != b.feasible) return a.feasible;
  if (!a.feasible) return false;
  if (a.bound != b.bound) return a.bound < b.bound;
  const double sa = a.values.sum(), sb = b.values.sum();
  if (sa != sb) return sa > sb;
  for (Index i = 0; i < a.values.size(); ++i)
    if (a.values(i) != b.values(i)) return a.values(i) > b.values(i);
  return false;
}

OptimizedWeights optimize_impl(const AngleVector& theta_u,
                               const AngleVector& theta_v,
                               const CoherenceProfile& profile, Index n,
                               Index r, Index prior_dim,
                               const OptimizerOptions& opts, bool parallel) {
  if (theta_u.size() != r || theta_v.size() != r)
    throw std::invalid_argument("optimize_weights: angle sizes != rank");
  if (prior_dim < r)
    throw std::invalid_argument("optimize_weights: prior_dim < rank");

  const Index tail = prior_dim - r;
  const Index dim = opts.search_tail ? 2 * (r + tail) : 2 * r;
  const double base_max = profile.mu.maxCoeff() + profile.nu.maxCoeff();
  const BoundObjective obj{
      theta_u,
      theta_v,
      n,
      r,
      prior_dim,
      opts.scale_c * base_max * double(r) * std::log(double(n)) / double(n),
      profile.eta_joint / profile.eta};

  auto snap = [&](double h) {
    int k = 1 + int(h * opts.grid);
    k = std::clamp(k, 1, opts.grid);
    return double(k) / double(opts.grid);
  };

  // All-ones, a family of uniform-scalar points (the objective is a max
  // over directions, so the diagonal is where descent actually starts), and
  // a low-discrepancy spread over the box.
  std::vector<Vec> starts(opts.starts);
  starts[0] = Vec::Ones(dim);
  const int uniform_starts = std::min(opts.starts - 1, 15);
  for (int s = 1; s <= uniform_starts; ++s)
    starts[s] = Vec::Constant(dim, snap(double(s) / 16.0));
  for (int s = uniform_starts + 1; s < opts.starts; ++s) {
    Vec x(dim);
    for (Index d = 0; d < dim; ++d)
      x(d) = snap(radical_inverse(s, nth_prime(int(d))));
    starts[s] = std::move(x);
  }

  std::vector<Candidate> results(opts.starts);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int s = 0; s < opts.starts; ++s)
    results[s] = descend(starts[s], obj, r, tail, opts.search_tail, opts.grid,
                         opts.max_sweeps);

  // Deterministic reduction: order fixed by start index.
  Candidate best = results[0];
  for (int s = 1; s < opts.starts; ++s)
    if (better_candidate(results[s], best)) best = results[s];

  OptimizedWeights out;
  if (!best.feasible) {
    out.weights = WeightSpec::ones(r, prior_dim);
    const AlphaSet alphas = make_alpha_set(out.weights, theta_u, theta_v);
    out.bound = sampling_bound(profile, alphas, n, r, opts.scale_c)
                    .p_uniform_raw;
    out.feasible = false;
    return out;
  }
  out.weights = WeightSpec::ones(r, prior_dim);
  out.weights.row_main = best.values.segment(0, r);
  out.weights.col_main = best.values.segment(r, r);
  if (opts.search_tail && tail > 0) {
    out.weights.row_tail = best.values.segment(2 * r, tail);
    out.weights.col_tail = best.values.segment(2 * r + tail, tail);
  }
  out.bound = best.bound;
  out.feasible = true;
  return out;
}

}  // namespace

OptimizedWeights optimize_weights(const AngleVector& theta_u,
                                  const AngleVector& theta_v,
                                  const CoherenceProfile& profile, Index n,
                                  Index r, Index prior_dim,
                                  const OptimizerOptions& opts) {
  return optimize_impl(theta_u, theta_v, profile, n, r, prior_dim, opts, true);
}

OptimizedWeights optimize_weights_serial(const AngleVector& theta_u,
                                         const AngleVector& theta_v,
                                         const CoherenceProfile& profile,
                                         Index n, Index r, Index prior_dim,
                                         const OptimizerOptions& opts) {
  return optimize_impl(theta_u, theta_v, profile, n, r, prior_dim, opts,
                       false);
}

}  // namespace mwmc
