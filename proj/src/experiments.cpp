#include "mwmc/experiments.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mwmc/rng.hpp"

namespace mwmc {

const char* method_name(Method m) {
  switch (m) {
    case Method::unweighted: return "unweighted";
    case Method::single_weight: return "single_weight";
    case Method::multi_weight: return "multi_weight";
    case Method::multi_weight_optimal: return "multi_weight_optimal";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "unweighted") return Method::unweighted;
  if (name == "single" || name == "single_weight") return Method::single_weight;
  if (name == "multi" || name == "multi_weight") return Method::multi_weight;
  if (name == "optimal" || name == "multi_weight_optimal")
    return Method::multi_weight_optimal;
  throw std::invalid_argument("unknown method: " + name);
}

void ScenarioConfig::validate() const {
  if (n < 2) throw std::invalid_argument("scenario: n must be >= 2");
  if (rank < 1 || rank > prior_dim)
    throw std::invalid_argument("scenario: need 1 <= rank <= prior_dim");
  if (rank + prior_dim > n)
    throw std::invalid_argument("scenario: need rank + prior_dim <= n");
  if (mode == AngleMode::explicit_angles) {
    if (theta_u_deg.size() != rank || theta_v_deg.size() != rank)
      throw std::invalid_argument("scenario: need one angle per direction");
  } else if (!(perturb_sigma > 0.0)) {
    throw std::invalid_argument("scenario: perturb_sigma must be > 0");
  }
  if (noise_sigma < 0.0)
    throw std::invalid_argument("scenario: noise_sigma must be >= 0");
}

void SweepConfig::validate() const {
  if (p_grid.empty()) throw std::invalid_argument("sweep: empty p grid");
  for (double p : p_grid)
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("sweep: p values must lie in (0, 1]");
  if (methods.empty()) throw std::invalid_argument("sweep: no methods");
  if (trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
}

Scenario gen_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const Index n = cfg.n, r = cfg.rank, rp = cfg.prior_dim;

  Mat a(n, r), b(n, r);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < r; ++j) {
      a(i, j) = rng::gaussian(cfg.seed, i, j, rng::kLeftFactor);
      b(i, j) = rng::gaussian(cfg.seed, i, j, rng::kRightFactor);
    }
  const Mat x = a * b.transpose();
  LowRankModel model = LowRankModel::truncate(x, r);

  if (cfg.mode == ScenarioConfig::AngleMode::explicit_angles) {
    const AngleVector tu = AngleVector::from_degrees(cfg.theta_u_deg);
    const AngleVector tv = AngleVector::from_degrees(cfg.theta_v_deg);
    OrthonormalBasis up = build_prior_basis(model.left, tu, rp,
                                            rng::combine(cfg.seed, 101));
    OrthonormalBasis vp = build_prior_basis(model.right, tv, rp,
                                            rng::combine(cfg.seed, 102));
    AngleVector mu = principal_angles(model.left, up);
    AngleVector mv = principal_angles(model.right, vp);
    PriorSubspaces priors{std::move(up), std::move(vp), std::move(mu),
                          std::move(mv)};
    CoherenceProfile profile = make_coherence_profile(model, priors);
    return Scenario{cfg, std::move(model), std::move(priors),
                    std::move(profile)};
  }

  Mat perturbed = x;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      perturbed(i, j) +=
          cfg.perturb_sigma * rng::gaussian(cfg.seed, i, j, rng::kPerturbation);
  const SvdResult svd = full_svd(perturbed);
  PriorSubspaces priors = PriorSubspaces::align(model, svd.U.leftCols(rp),
                                                svd.V.leftCols(rp));
  CoherenceProfile profile = make_coherence_profile(model, priors);
  return Scenario{cfg, std::move(model), std::move(priors),
                  std::move(profile)};
}

WeightSpec method_weights(Method m, const Scenario& scenario) {
  const Index r = scenario.cfg.rank, rp = scenario.cfg.prior_dim;
  const AngleVector& tu = scenario.priors.left_angles;
  const AngleVector& tv = scenario.priors.right_angles;
  switch (m) {
    case Method::unweighted:
      return WeightSpec::ones(r, rp);
    case Method::single_weight: {
      const SingleWeightChoice c = optimize_single_weight(
          tu.max_angle(), tv.max_angle(), scenario.profile, scenario.cfg.n, r);
      return WeightSpec::uniform(c.weight, c.weight, r, rp);
    }
    case Method::multi_weight:
      return heuristic_weights(tu, tv, rp);
    case Method::multi_weight_optimal:
      return optimize_weights(tu, tv, scenario.profile, scenario.cfg.n, r, rp)
          .weights;
  }
  throw std::logic_error("method_weights: unreachable");
}

std::uint64_t trial_seed(std::uint64_t base_seed, Method method, double p,
                         int trial) {
  std::uint64_t h = rng::splitmix64(base_seed);
  h = rng::combine(h, static_cast<std::uint64_t>(method));
  h = rng::combine(h, std::bit_cast<std::uint64_t>(p));
  h = rng::combine(h, static_cast<std::uint64_t>(trial));
  return h;
}

namespace {

struct Task {
  Method method;
  int method_slot;
  double p;
  int trial;
};

std::vector<ExperimentRecord> run_sweep_impl(const Scenario& scenario,
                                             const SweepConfig& sweep,
                                             bool parallel) {
  sweep.validate();
  const Index n = scenario.cfg.n;

  // Weights and projectors are per-method, independent of (p, trial).
  std::vector<WeightSpec> weights;
  std::vector<WeightedProjector> row_projs, col_projs;
  weights.reserve(sweep.methods.size());
  for (Method m : sweep.methods) {
    weights.push_back(method_weights(m, scenario));
    const WeightSpec& w = weights.back();
    row_projs.push_back(make_weighted_projector(scenario.priors.left_prior,
                                                w.row_main, w.row_tail));
    col_projs.push_back(make_weighted_projector(scenario.priors.right_prior,
                                                w.col_main, w.col_tail));
  }

  std::vector<Task> tasks;
  for (int ms = 0; ms < int(sweep.methods.size()); ++ms)
    for (double p : sweep.p_grid)
      for (int t = 0; t < sweep.trials; ++t)
        tasks.push_back(Task{sweep.methods[ms], ms, p, t});

  std::vector<ExperimentRecord> records(tasks.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t k = 0; k < std::int64_t(tasks.size()); ++k) {
    const Task& task = tasks[k];
    ExperimentRecord rec;
    rec.method = task.method;
    rec.p = task.p;
    rec.trial = task.trial;
    rec.seed = trial_seed(sweep.base_seed, task.method, task.p, task.trial);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const SamplingPattern pattern =
          draw_pattern_serial(Mat::Constant(n, n, task.p), rec.seed);
      const NoisySample sample =
          observe_serial(scenario.model.matrix, pattern,
                         scenario.cfg.noise_sigma, rec.seed);
      const Solution sol =
          solve_weighted(sample, pattern, row_projs[task.method_slot],
                         col_projs[task.method_slot], sample.noise_bound,
                         sweep.solver);
      rec.nre = nre(sol.estimate, scenario.model.matrix);
      rec.iters = sol.iters;
      rec.converged = sol.converged;
    } catch (const std::exception&) {
      rec.nre = 1.0;  // e.g. an empty mask at very small p
      rec.iters = 0;
      rec.converged = false;
    }
    rec.success = rec.nre < kSuccessNre;
    if (sweep.timing) {
      const auto t1 = std::chrono::steady_clock::now();
      rec.runtime_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0)
              .count();
    }
    records[k] = std::move(rec);
  }

  std::sort(records.begin(), records.end(),
            [](const ExperimentRecord& a, const ExperimentRecord& b) {
              if (a.method != b.method) return a.method < b.method;
              if (a.p != b.p) return a.p < b.p;
              return a.trial < b.trial;
            });
  return records;
}

}  // namespace

std::vector<ExperimentRecord> run_sweep(const Scenario& scenario,
                                        const SweepConfig& sweep) {
  return run_sweep_impl(scenario, sweep, true);
}

std::vector<ExperimentRecord> run_sweep_serial(const Scenario& scenario,
                                               const SweepConfig& sweep) {
  return run_sweep_impl(scenario, sweep, false);
}

std::vector<AggregateRow> aggregate(
    const std::vector<ExperimentRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  std::vector<ExperimentRecord> sorted = records;
  std::sort(sorted.begin(), sorted.end(),
            [](const ExperimentRecord& a, const ExperimentRecord& b) {
              if (a.method != b.method) return a.method < b.method;
              if (a.p != b.p) return a.p < b.p;
              return a.trial < b.trial;
            });

  std::vector<AggregateRow> rows;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].method == sorted[i].method &&
           sorted[j].p == sorted[i].p)
      ++j;
    AggregateRow row;
    row.method = sorted[i].method;
    row.p = sorted[i].p;
    row.trials = int(j - i);
    double nre_sum = 0.0;
    int successes = 0;
    std::vector<int> iters;
    for (std::size_t k = i; k < j; ++k) {
      nre_sum += sorted[k].nre;
      successes += sorted[k].success ? 1 : 0;
      iters.push_back(sorted[k].iters);
    }
    std::sort(iters.begin(), iters.end());
    row.success_rate = double(successes) / double(row.trials);
    row.mean_nre = nre_sum / double(row.trials);
    row.median_iters = iters[(iters.size() - 1) / 2];
    rows.push_back(row);
    i = j;
  }
  return rows;
}

std::string records_to_csv(const std::vector<ExperimentRecord>& records) {
  std::string out = "method,p,trial,seed,nre,success,iters,runtime_ms\n";
  char line[256];
  for (const ExperimentRecord& r : records) {
    std::snprintf(line, sizeof(line), "%s,%.6g,%d,%llu,%.12e,%d,%d,%lld\n",
                  method_name(r.method), r.p, r.trial,
                  static_cast<unsigned long long>(r.seed), r.nre,
                  r.success ? 1 : 0, r.iters,
                  static_cast<long long>(r.runtime_ms));
    out += line;
  }
  return out;
}

void write_csv(const std::vector<ExperimentRecord>& records,
               std::ostream& out) {
  out << records_to_csv(records);
}

double fraction_converged(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) return 1.0;
  std::int64_t ok = 0;
  for (const ExperimentRecord& r : records) ok += r.converged ? 1 : 0;
  return double(ok) / double(records.size());
}

const std::vector<AnglePreset>& angle_presets() {
  static const std::vector<AnglePreset> presets = [] {
    auto vec = [](std::initializer_list<double> v) {
      Vec out(Index(v.size()));
      Index i = 0;
      for (double x : v) out(i++) = x;
      return out;
    };
    std::vector<AnglePreset> p;
    p.push_back({"accurate", vec({1.32, 1.72, 2.11, 3.07}),
                 vec({1.08, 1.70, 2.37, 2.73})});
    p.push_back({"mixed", vec({2.01, 8.28, 15.55, 20.26}),
                 vec({2.09, 10.5, 19.45, 22.00})});
    p.push_back({"weak", vec({40.87, 49.63, 50.55, 69.39}),
                 vec({28.76, 37.83, 40.52, 63.65})});
    return p;
  }();
  return presets;
}

const AnglePreset& angle_preset(const std::string& name) {
  for (const AnglePreset& p : angle_presets())
    if (p.name == name) return p;
  throw std::invalid_argument("unknown angle preset: " + name);
}

std::string bounds_report_json(const Scenario& scenario, double scale_c) {
  const Index n = scenario.cfg.n, r = scenario.cfg.rank,
              rp = scenario.cfg.prior_dim;
  const OptimizedWeights opt =
      optimize_weights(scenario.priors.left_angles,
                       scenario.priors.right_angles, scenario.profile, n, r,
                       rp, OptimizerOptions{.scale_c = scale_c});
  const AlphaSet alphas =
      make_alpha_set(opt.weights, scenario.priors.left_angles,
                     scenario.priors.right_angles);
  const SamplingBound bound =
      sampling_bound(scenario.profile, alphas, n, r, scale_c);

  auto to_array = [](const Vec& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
  };
  nlohmann::json j;
  j["alphas"] = {{"alpha1", alphas.alpha1}, {"alpha2", alphas.alpha2},
                 {"alpha3", alphas.alpha3}, {"alpha4", alphas.alpha4},
                 {"alpha5", alphas.alpha5}, {"alpha6", alphas.alpha6}};
  j["p_required_uniform"] = bound.p_uniform;
  j["feasible"] = opt.feasible && bound.alpha6_feasible;
  j["weights"] = {{"row_main", to_array(opt.weights.row_main)},
                  {"row_tail", to_array(opt.weights.row_tail)},
                  {"col_main", to_array(opt.weights.col_main)},
                  {"col_tail", to_array(opt.weights.col_tail)}};
  return j.dump(2);
}

std::vector<double> parse_p_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    double start = 0, stop = 0, step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 ||
        step <= 0)
      throw std::invalid_argument("bad p grid range: " + text);
    for (int k = 0;; ++k) {
      const double p = start + k * step;
      if (p > stop + 1e-9) break;
      grid.push_back(p);
    }
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) grid.push_back(std::stod(item));
  }
  return grid;
}

}  // namespace mwmc
