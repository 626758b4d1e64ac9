// Compares the OpenMP kernels against their serial references and reports
// wall times plus the achieved speedup. Every pair is also checked for
// bitwise-identical output before timing, since the counter-based generator
// makes that a hard guarantee rather than a hope.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "mwmc/experiments.hpp"

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const std::string& name, double serial_ms, double parallel_ms,
            bool identical) {
  std::printf("%-28s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx   %s\n",
              name.c_str(), serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "outputs identical" : "OUTPUTS DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 1024;
  std::printf("threads: %d\n", omp_get_max_threads());

  const std::uint64_t seed = 7;
  const mwmc::Mat probs = mwmc::Mat::Constant(n, n, 0.3);

  {
    const mwmc::SamplingPattern a = mwmc::draw_pattern(probs, seed);
    const mwmc::SamplingPattern b = mwmc::draw_pattern_serial(probs, seed);
    const bool same = a.mask == b.mask;
    const double ts = time_ms([&] { mwmc::draw_pattern_serial(probs, seed); }, 5);
    const double tp = time_ms([&] { mwmc::draw_pattern(probs, seed); }, 5);
    report("draw_pattern (n=" + std::to_string(n) + ")", ts, tp, same);
  }

  const mwmc::SamplingPattern pattern = mwmc::draw_pattern(probs, seed);
  const mwmc::Mat z = mwmc::Mat::Random(n, n);

  {
    const mwmc::Mat a = mwmc::apply_r_omega(z, pattern);
    const mwmc::Mat b = mwmc::apply_r_omega_serial(z, pattern);
    const bool same = a == b;
    const double ts = time_ms([&] { mwmc::apply_r_omega_serial(z, pattern); }, 5);
    const double tp = time_ms([&] { mwmc::apply_r_omega(z, pattern); }, 5);
    report("apply_r_omega", ts, tp, same);
  }

  {
    const mwmc::NoisySample a = mwmc::observe(z, pattern, 0.1, seed);
    const mwmc::NoisySample b = mwmc::observe_serial(z, pattern, 0.1, seed);
    const bool same = a.values == b.values && a.noise_bound == b.noise_bound;
    const double ts = time_ms([&] { mwmc::observe_serial(z, pattern, 0.1, seed); }, 5);
    const double tp = time_ms([&] { mwmc::observe(z, pattern, 0.1, seed); }, 5);
    report("observe (noisy)", ts, tp, same);
  }

  {
    mwmc::ScenarioConfig cfg;
    const mwmc::AnglePreset& preset = mwmc::angle_preset("mixed");
    cfg.theta_u_deg = preset.theta_u_deg;
    cfg.theta_v_deg = preset.theta_v_deg;
    const mwmc::Scenario scenario = mwmc::gen_scenario(cfg);

    {
      const auto& pr = scenario.priors;
      mwmc::OptimizerOptions opts;
      opts.starts = 16;
      const auto a = mwmc::optimize_weights(pr.left_angles, pr.right_angles,
                                            scenario.profile, cfg.n, cfg.rank,
                                            cfg.prior_dim, opts);
      const auto b = mwmc::optimize_weights_serial(
          pr.left_angles, pr.right_angles, scenario.profile, cfg.n, cfg.rank,
          cfg.prior_dim, opts);
      const bool same = a.bound == b.bound &&
                        a.weights.row_main == b.weights.row_main &&
                        a.weights.col_main == b.weights.col_main;
      const double ts = time_ms(
          [&] {
            mwmc::optimize_weights_serial(pr.left_angles, pr.right_angles,
                                          scenario.profile, cfg.n, cfg.rank,
                                          cfg.prior_dim, opts);
          },
          3);
      const double tp = time_ms(
          [&] {
            mwmc::optimize_weights(pr.left_angles, pr.right_angles,
                                   scenario.profile, cfg.n, cfg.rank,
                                   cfg.prior_dim, opts);
          },
          3);
      report("optimize_weights (16 starts)", ts, tp, same);
    }

    {
      mwmc::SweepConfig sweep;
      sweep.p_grid = {0.5, 0.7};
      sweep.methods = {mwmc::Method::unweighted, mwmc::Method::multi_weight};
      sweep.trials = 8;
      const auto a = mwmc::run_sweep(scenario, sweep);
      const auto b = mwmc::run_sweep_serial(scenario, sweep);
      const bool same = mwmc::records_to_csv(a) == mwmc::records_to_csv(b);
      const double ts = time_ms([&] { mwmc::run_sweep_serial(scenario, sweep); }, 1);
      const double tp = time_ms([&] { mwmc::run_sweep(scenario, sweep); }, 1);
      report("run_sweep (32 solves)", ts, tp, same);
    }
  }

  return 0;
}
