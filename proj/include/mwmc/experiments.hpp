#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mwmc/bounds.hpp"
#include "mwmc/solver.hpp"

namespace mwmc {

enum class Method {
  unweighted,
  single_weight,
  multi_weight,
  multi_weight_optimal,
};

const char* method_name(Method m);
/// Accepts both the CLI short names (single, multi, optimal) and the full
/// record names.
Method parse_method(const std::string& name);

struct ScenarioConfig {
  Index n = 20;
  Index rank = 4;
  Index prior_dim = 8;
  enum class AngleMode { explicit_angles, perturbation } mode =
      AngleMode::explicit_angles;
  Vec theta_u_deg;            // explicit mode
  Vec theta_v_deg;
  double perturb_sigma = 1e-2;  // perturbation mode, noise std dev
  double noise_sigma = 0.0;     // observation noise
  std::uint64_t seed = 42;

  void validate() const;
};

struct Scenario {
  ScenarioConfig cfg;
  LowRankModel model;
  PriorSubspaces priors;
  CoherenceProfile profile;
};

Scenario gen_scenario(const ScenarioConfig& cfg);

struct SweepConfig {
  std::vector<double> p_grid;
  std::vector<Method> methods;
  int trials = 50;
  std::uint64_t base_seed = 42;
  SolverConfig solver;
  /// Wall-clock timing breaks byte-reproducibility of the CSV, so it is
  /// opt-in; runtime_ms stays 0 otherwise.
  bool timing = false;

  void validate() const;
};

struct ExperimentRecord {
  Method method;
  double p = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double nre = 0.0;
  bool success = false;  // nre < 1e-4
  int iters = 0;
  std::int64_t runtime_ms = 0;
  bool converged = false;  // internal, not serialized
};

/// Success threshold on the normalized recovery error.
inline constexpr double kSuccessNre = 1e-4;

std::vector<ExperimentRecord> run_sweep(const Scenario& scenario,
                                        const SweepConfig& sweep);
std::vector<ExperimentRecord> run_sweep_serial(const Scenario& scenario,
                                               const SweepConfig& sweep);

/// Weights a method would use on this scenario.
WeightSpec method_weights(Method m, const Scenario& scenario);

struct AggregateRow {
  Method method;
  double p = 0.0;
  int trials = 0;
  double success_rate = 0.0;
  double mean_nre = 0.0;
  int median_iters = 0;
};

std::vector<AggregateRow> aggregate(const std::vector<ExperimentRecord>& records);

/// Exact schema: method,p,trial,seed,nre,success,iters,runtime_ms
std::string records_to_csv(const std::vector<ExperimentRecord>& records);
void write_csv(const std::vector<ExperimentRecord>& records, std::ostream& out);

/// Stable seed derivation; adding a method never shifts another method's
/// randomness.
std::uint64_t trial_seed(std::uint64_t base_seed, Method method, double p,
                         int trial);

double fraction_converged(const std::vector<ExperimentRecord>& records);

struct AnglePreset {
  std::string name;
  Vec theta_u_deg;
  Vec theta_v_deg;
};

/// Published angle sets: accurate, mixed, weak.
const std::vector<AnglePreset>& angle_presets();
const AnglePreset& angle_preset(const std::string& name);

/// Bound report for one scenario at the optimizer's weights:
/// {alphas, p_required_uniform, feasible, weights}.
std::string bounds_report_json(const Scenario& scenario, double scale_c = 1.0);

/// "a:b:s" range (inclusive, fuzz-tolerant endpoint) or comma list.
std::vector<double> parse_p_grid(const std::string& text);

}  // namespace mwmc
