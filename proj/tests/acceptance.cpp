// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fails. Each criterion pins its tolerances in code; a subset can be run by
// listing criterion numbers as arguments.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mwmc/experiments.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mwmc;
using namespace mwmc::testing;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Criterion {
  int number;
  std::string name;
  double runtime_limit_s;
  std::function<bool(std::string&)> run;
};

ScenarioConfig preset_config(const std::string& name) {
  ScenarioConfig cfg;
  const AnglePreset& p = angle_preset(name);
  cfg.theta_u_deg = p.theta_u_deg;
  cfg.theta_v_deg = p.theta_v_deg;
  return cfg;
}

// ---- criterion 1: Remark-1 constants ---------------------------------

bool remark1_constants(std::string& detail) {
  int exact = 0;
  const int cases = 100;
  for (int s = 0; s < cases; ++s) {
    const double tu = (0.01 + 89.98 * urand(s, 0, 60)) * kPi / 180.0;
    const double tv = (0.01 + 89.98 * urand(s, 1, 60)) * kPi / 180.0;
    const SingleWeightAlphas a = alpha_single(1.0, 1.0, tu, tv);
    if (a.alpha1 == 1.0 && a.alpha2 == 4.0 && a.alpha3 == 0.0) ++exact;
  }
  detail = std::to_string(exact) + "/100 exact";
  return exact == cases;
}

// ---- criterion 2: transform correctness ------------------------------

bool transform_correctness(std::string& detail) {
  double worst_q = 0.0, worst_norm = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Index r = 1 + Index(s % 4);
    const Index rp = r + Index(s % (9 - r)) % (8 - r + 1);
    const Index rp_ok = std::min<Index>(std::max(rp, r), 8);
    const Index n = std::max<Index>(r + rp_ok, 10 + Index(s % 21));
    if (n > 30 || r + rp_ok > n) continue;
    TransformInstance inst =
        random_transform_instance(n, r, rp_ok, 42000 + s, 0.15);
    TransformBundle tb = build_transform(inst.truth, inst.prior,
                                         inst.main_weights, inst.tail_weights);
    const Mat q = direct_q(inst.prior, inst.main_weights, inst.tail_weights);
    worst_q = std::max(worst_q, (tb.rebuild_q() - q).norm());
    worst_norm =
        std::max(worst_norm, std::abs(spectral_norm(tb.core) - 1.0));
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |Q defect| %.2e, max ||L||-1 %.2e",
                worst_q, worst_norm);
  detail = buf;
  return worst_q < 1e-10 && worst_norm < 1e-9;
}

// ---- criterion 3: Lemma 4 block norms --------------------------------

bool lemma4_identities(std::string& detail) {
  double worst = 0.0, variant_gap = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Index r = 1 + Index(s % 4);
    const Index n = 12 + Index(s % 15);
    const Index rp = std::min<Index>(r + 1 + Index(s % 4), n - r);
    if (rp < r) continue;
    TransformInstance inst =
        random_transform_instance(n, r, rp, 43000 + s, 0.1);
    const Lemma4Norms norms =
        lemma4_norms(inst.main_weights, inst.tail_weights, inst.theta);
    TransformBundle tb = build_transform(inst.truth, inst.prior,
                                         inst.main_weights, inst.tail_weights);
    const Index t = rp - r;
    const Mat l11 = tb.core_block(0, 0), l12 = tb.core_block(0, 1);
    const Mat l22 = tb.core_block(1, 1), w2 = tb.core_block(2, 2);
    Mat row(r, 2 * r);
    row << l11, l12;
    Mat defect = Mat::Zero(2 * r + t, 2 * r + t);
    defect.block(0, r, r, r) = l12;
    defect.block(r, r, r, r) = l22 - Mat::Identity(r, r);
    if (t > 0) defect.block(2 * r, 2 * r, t, t) = w2 - Mat::Identity(t, t);
    Mat tail_block = Mat::Zero(r + t, r + t);
    tail_block.topLeftCorner(r, r) = Mat::Identity(r, r) - l22;
    if (t > 0)
      tail_block.bottomRightCorner(t, t) = Mat::Identity(t, t) - w2;

    worst = std::max(worst, std::abs(norms.l11 - spectral_norm(l11)));
    worst = std::max(worst, std::abs(norms.l12 - spectral_norm(l12)));
    worst = std::max(worst,
                     std::abs(norms.i_minus_l22 -
                              spectral_norm(Mat::Identity(r, r) - l22)));
    worst = std::max(worst, std::abs(norms.l11_l12 - spectral_norm(row)));
    worst = std::max(worst, std::abs(norms.l_prime - spectral_norm(defect)));
    worst = std::max(worst,
                     std::abs(norms.tail_block - spectral_norm(tail_block)));
    variant_gap =
        std::max(variant_gap, std::abs(norms.l12_variant - norms.l12));
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "max closed-vs-numeric gap %.2e; second printed L12 form "
                "deviates by up to %.3f (reported, not asserted equal)",
                worst, variant_gap);
  detail = buf;
  return worst < 1e-9 && variant_gap > 1e-3;
}

// ---- criterion 4: sampling operator ----------------------------------

bool sampling_operator(std::string& detail) {
  const Index n = 20;
  const Mat z = random_low_rank(n, 4, 5);
  const Mat probs = Mat::Constant(n, n, 0.3);
  Mat mean = Mat::Zero(n, n);
  const int draws = 20000;
  for (int s = 0; s < draws; ++s)
    mean += apply_r_omega(z, draw_pattern(probs, 90000 + s));
  mean /= double(draws);
  const double rel = (mean - z).norm() / z.norm();

  const Index r = 2;
  int contracting = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    const Mat x = random_low_rank(n, r, 10000 + s);
    LowRankModel m = LowRankModel::truncate(x, r);
    SupportProjector support(m.left, m.right);
    const Vec mu =
        (double(n) / double(r)) * m.left.cols().rowwise().squaredNorm();
    const Vec nu =
        (double(n) / double(r)) * m.right.cols().rowwise().squaredNorm();
    Mat p(n, n);
    const double scale = double(r) * std::log(double(n)) / double(n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        p(i, j) = std::clamp((mu(i) + nu(j)) * scale, 1e-6, 1.0);
    const SamplingPattern pat = draw_pattern(p, 20000 + s);
    if (oracles::contraction_norm(support, pat, 200, 555 + s) <= 0.75)
      ++contracting;
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "mean rel err %.4f (< 0.02); contraction ok %d/%d (need %d)",
                rel, contracting, seeds, int(0.95 * seeds));
  detail = buf;
  return rel < 0.02 && contracting >= int(0.95 * seeds);
}

// ---- criterion 5: solver oracle equivalence --------------------------

bool oracle_equivalence(std::string& detail) {
  const Index n = 10;
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const Index r = 1 + inst % 2;
    const Index rp = r + 2;
    const Mat x = random_low_rank(n, r, 60000 + inst);
    LowRankModel m = LowRankModel::truncate(x, r);
    OrthonormalBasis up = build_prior_basis(
        m.left, random_angles(r, 2.0, 45.0, 61000 + inst), rp, 62000 + inst);
    OrthonormalBasis vp = build_prior_basis(
        m.right, random_angles(r, 2.0, 45.0, 63000 + inst), rp, 64000 + inst);
    WeightedProjector qu =
        make_weighted_projector(up, random_weights(r, 0.3, inst, 70),
                                random_weights(rp - r, 0.3, inst, 71));
    WeightedProjector qv =
        make_weighted_projector(vp, random_weights(r, 0.3, inst, 72),
                                random_weights(rp - r, 0.3, inst, 73));
    const SamplingPattern pat =
        draw_pattern(Mat::Constant(n, n, 0.9), 65000 + inst);
    const NoisySample sample = observe(x, pat, 0.0, 65000 + inst);
    SolverConfig cfg;
    cfg.max_iters = 200000;
    cfg.primal_tol = 1e-11;
    cfg.dual_tol = 1e-11;
    const Solution sol = solve_weighted(sample, pat, qu, qv, 0.0, cfg);
    const Mat ref = oracles::admm_cg_weighted(sample.values, pat.mask, qu.q,
                                              qv.q, 5000, 1e-12);
    worst = std::max(worst, (sol.estimate - ref).norm() / x.norm());
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max rel disagreement %.2e", worst);
  detail = buf;
  return worst < 1e-6;
}

// ---- criterion 6: exact recovery at full sampling --------------------

bool full_sampling_recovery(std::string& detail) {
  const Scenario sc = gen_scenario(preset_config("accurate"));
  double worst = 0.0;
  for (Method m : {Method::unweighted, Method::single_weight,
                   Method::multi_weight, Method::multi_weight_optimal}) {
    const WeightSpec w = method_weights(m, sc);
    WeightedProjector qu = make_weighted_projector(sc.priors.left_prior,
                                                   w.row_main, w.row_tail);
    WeightedProjector qv = make_weighted_projector(sc.priors.right_prior,
                                                   w.col_main, w.col_tail);
    for (int s = 0; s < 20; ++s) {
      const SamplingPattern pat =
          draw_pattern(Mat::Constant(sc.cfg.n, sc.cfg.n, 1.0), 70000 + s);
      const NoisySample sample = observe(sc.model.matrix, pat, 0.0, 70000 + s);
      const Solution sol = solve_weighted(sample, pat, qu, qv, 0.0);
      worst = std::max(worst, nre(sol.estimate, sc.model.matrix));
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max NRE %.2e", worst);
  detail = buf;
  return worst < 1e-8;
}

// ---- criterion 7: phase-transition ordering --------------------------

double min_p_with_rate(const std::vector<AggregateRow>& rows, Method m,
                       double target) {
  double best = 1.05;  // sentinel: never reached
  for (const AggregateRow& row : rows)
    if (row.method == m && row.success_rate >= target)
      best = std::min(best, row.p);
  return best;
}

bool phase_ordering(std::string& detail) {
  std::vector<double> grid;
  for (int k = 0; k <= 14; ++k) grid.push_back(0.30 + 0.05 * k);

  SweepConfig sweep;
  sweep.p_grid = grid;
  sweep.trials = 50;
  sweep.base_seed = 42;
  sweep.solver.max_iters = 4000;

  std::ostringstream report;
  double acc_opt = 0, acc_single = 0, acc_unweighted = 0;
  bool strict_somewhere = false;
  for (const std::string preset : {"accurate", "mixed", "weak"}) {
    const Scenario sc = gen_scenario(preset_config(preset));
    sweep.methods = {Method::single_weight, Method::multi_weight_optimal};
    if (preset == "accurate")
      sweep.methods.push_back(Method::unweighted);
    const auto rows = aggregate(run_sweep(sc, sweep));
    const double p_opt =
        min_p_with_rate(rows, Method::multi_weight_optimal, 0.9);
    const double p_single = min_p_with_rate(rows, Method::single_weight, 0.9);
    report << preset << ": p*(optimal)=" << p_opt
           << " p*(single)=" << p_single;
    if (preset == "accurate") {
      acc_opt = p_opt;
      acc_single = p_single;
      acc_unweighted = min_p_with_rate(rows, Method::unweighted, 0.9);
      report << " p*(unweighted)=" << acc_unweighted;
    }
    report << "; ";
    if (p_opt < p_single - 1e-9) strict_somewhere = true;
  }

  detail = report.str();
  const bool ordered =
      acc_opt <= acc_single + 1e-9 && acc_single <= acc_unweighted + 1e-9;
  return ordered && strict_somewhere;
}

// ---- criterion 8: weight-optimizer soundness --------------------------

bool optimizer_soundness(std::string& detail) {
  std::ostringstream report;
  bool ok = true;

  // (a) zero angles: feasible, never worse than all-ones, dominates a
  // 10^6-point random search over the same objective.
  {
    const Index n = 20, r = 4, rp = 8;
    AngleVector zero{Vec::Zero(r)};
    const CoherenceProfile profile = uniform_coherence_profile(n);
    const OptimizedWeights opt =
        optimize_weights(zero, zero, profile, n, r, rp);
    const AlphaSet ones_alphas =
        make_alpha_set(WeightSpec::ones(r, rp), zero, zero);
    const double ones_bound =
        sampling_bound(profile, ones_alphas, n, r).p_uniform_raw;
    ok = ok && opt.feasible && opt.bound <= ones_bound + 1e-12;

    const double base = (profile.mu.maxCoeff() + profile.nu.maxCoeff()) *
                        double(r) * std::log(double(n)) / double(n);
    double search_best = 1e300;
    for (int s = 0; s < 1000000; ++s) {
      WeightSpec w = WeightSpec::ones(r, rp);
      for (Index i = 0; i < r; ++i) {
        w.row_main(i) = 1.0 / 256.0 + (255.0 / 256.0) * urand(s, i, 80);
        w.col_main(i) = 1.0 / 256.0 + (255.0 / 256.0) * urand(s, i, 81);
      }
      const MultiWeightAlphas a = alpha_multi(w, zero, zero);
      if (a.alpha6 > 0.25) continue;
      const double lf = std::max(std::log(a.alpha4 * double(n)), 1.0);
      const double wf = std::max(
          a.alpha5 * a.alpha5 * (1.0 + profile.eta_joint / profile.eta), 1.0);
      search_best = std::min(search_best, base * lf * wf);
    }
    ok = ok && opt.bound <= search_best * (1.0 + 1e-9);
    report << "zero-angle bound " << opt.bound << " vs random-search "
           << search_best << "; ";
  }

  // (b) feasible whenever the all-ones point is, never worse than all-ones.
  for (std::uint64_t s = 0; s < 10 && ok; ++s) {
    const Index r = 2 + Index(s % 3);
    const Index rp = r + 2;
    const Index n = 20;
    AngleVector tu = random_angles(r, 0.5, 35.0, 90000 + s);
    AngleVector tv = random_angles(r, 0.5, 35.0, 91000 + s);
    const CoherenceProfile profile = uniform_coherence_profile(n);
    const AlphaSet ones_alphas =
        make_alpha_set(WeightSpec::ones(r, rp), tu, tv);
    const OptimizedWeights opt = optimize_weights(tu, tv, profile, n, r, rp);
    if (ones_alphas.alpha6 <= 0.25) ok = ok && opt.feasible;
    const double ones_bound =
        sampling_bound(profile, ones_alphas, n, r).p_uniform_raw;
    ok = ok && opt.bound <= ones_bound + 1e-12;
  }

  // (c) rank-one toy against the exhaustive grid.
  {
    Vec deg(1);
    deg << 10.0;
    AngleVector theta = AngleVector::from_degrees(deg);
    const CoherenceProfile profile = uniform_coherence_profile(12);
    const OptimizedWeights opt =
        optimize_weights(theta, theta, profile, 12, 1, 2);
    const double base = (profile.mu.maxCoeff() + profile.nu.maxCoeff()) *
                        std::log(12.0) / 12.0;
    double best = 1e300;
    const int g = 1000;
    for (int i = 1; i <= g; ++i)
      for (int j = 1; j <= g; ++j) {
        WeightSpec w = WeightSpec::ones(1, 2);
        w.row_main(0) = double(i) / g;
        w.col_main(0) = double(j) / g;
        const MultiWeightAlphas a = alpha_multi(w, theta, theta);
        if (a.alpha6 > 0.25) continue;
        const double lf = std::max(std::log(a.alpha4 * 12.0), 1.0);
        const double wf = std::max(
            a.alpha5 * a.alpha5 * (1.0 + profile.eta_joint / profile.eta),
            1.0);
        best = std::min(best, base * lf * wf);
      }
    ok = ok && opt.feasible && opt.bound <= best * 1.02 + 1e-12 &&
         opt.bound >= best * 0.98 - 1e-12;
    report << "rank-one toy " << opt.bound << " vs exhaustive " << best;
  }

  detail = report.str();
  return ok;
}

// ---- criterion 9: byte-identical sweeps -------------------------------

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool determinism(std::string& detail) {
  // library level
  const Scenario sc = gen_scenario(preset_config("accurate"));
  SweepConfig sweep;
  sweep.p_grid = {0.45, 0.5, 0.55};
  sweep.methods = {Method::unweighted, Method::single_weight,
                   Method::multi_weight, Method::multi_weight_optimal};
  sweep.trials = 10;
  sweep.solver.max_iters = 1500;
  const bool lib_ok = records_to_csv(run_sweep(sc, sweep)) ==
                      records_to_csv(run_sweep(sc, sweep));

  // CLI level: the built binary twice with identical flags
  const char* env = std::getenv("MCSWEEP_BIN");
  std::filesystem::path bin = env ? env : "tools/mcsweep";
  if (!std::filesystem::exists(bin)) {
    detail = "mcsweep binary not found (set MCSWEEP_BIN)";
    return false;
  }
  const auto tmp = std::filesystem::temp_directory_path();
  const auto out1 = tmp / "mwmc_det_1.csv";
  const auto out2 = tmp / "mwmc_det_2.csv";
  const std::string flags =
      " --n 20 --rank 4 --rprime 8 --angles-preset accurate"
      " --p-grid 0.45:0.55:0.05 --trials 10 --methods unweighted,multi"
      " --seed 7 --max-iters 1500 --out ";
  const std::string quiet = " > /dev/null 2>&1";
  const int rc1 =
      std::system((bin.string() + flags + out1.string() + quiet).c_str());
  const int rc2 =
      std::system((bin.string() + flags + out2.string() + quiet).c_str());
  const std::string a = read_file(out1), b = read_file(out2);
  const bool cli_ok = rc1 == 0 && rc2 == 0 && !a.empty() && a == b;
  std::filesystem::remove(out1);
  std::filesystem::remove(out2);

  detail = std::string("library ") + (lib_ok ? "identical" : "DIFFERS") +
           ", CLI " + (cli_ok ? "identical" : "DIFFERS");
  return lib_ok && cli_ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  std::vector<Criterion> criteria = {
      {1, "Remark-1 constants alpha_single(1,1) == (1,4,0)", 1.0,
       remark1_constants},
      {2, "transform rebuild matches the weighted projector", 30.0,
       transform_correctness},
      {3, "Lemma-4 closed-form block norms", 30.0, lemma4_identities},
      {4, "sampling operator unbiasedness and support contraction", 300.0,
       sampling_operator},
      {5, "splitting solver agrees with the independent proximal oracle",
       300.0, oracle_equivalence},
      {6, "exact recovery at full sampling", 60.0, full_sampling_recovery},
      {7, "phase-transition ordering across methods", 7200.0, phase_ordering},
      {8, "weight optimizer feasibility and grid-oracle agreement", 120.0,
       optimizer_soundness},
      {9, "byte-identical sweeps from identical flags", 600.0, determinism},
  };

  int failures = 0;
  for (Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.number)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const bool in_time = elapsed <= c.runtime_limit_s;
    if (!(ok && in_time)) ++failures;
    std::printf("[%s] %d. %s (%.1f s%s)\n      %s\n",
                ok && in_time ? "PASS" : "FAIL", c.number, c.name.c_str(),
                elapsed, in_time ? "" : ", over budget", detail.c_str());
    std::fflush(stdout);
  }
  if (failures == 0)
    std::printf("all criteria passed\n");
  else
    std::printf("%d criteria failed\n", failures);
  return failures;
}
