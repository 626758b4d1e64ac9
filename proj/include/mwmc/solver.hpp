#pragma once

#include "mwmc/model.hpp"
#include "mwmc/sampling.hpp"

namespace mwmc {

struct SolverConfig {
  int max_iters = 2000;
  double primal_tol = 1e-8;  // relative movement of the primal iterate
  double dual_tol = 1e-8;    // relative movement of the dual iterate
  double penalty_rho = 1.0;  // primal/dual step balance
  bool adaptive = true;      // rescale rho by 2 when residuals diverge by 10x
  double adapt_ratio = 10.0;
  double adapt_factor = 2.0;
};

struct Solution {
  Mat estimate;
  int iters = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;  // ||Q_U X Q_V||_* at the returned iterate
};

/// Singular value thresholding: U max(S - tau, 0) V^T.
Mat svt(const Mat& m, double tau);

/// Solves  min ||Q_U Z Q_V||_*  s.t.  ||mask .* Z - Y||_F <= e  by a
/// primal-dual splitting. The dual variable lives where the weighted product
/// W = Q_U Z Q_V does, so its prox is a plain SVT; the primal step is the
/// mask-ball projection (pins observed entries when e = 0). One solve is
/// single-threaded and deterministic.
Solution solve_weighted(const NoisySample& sample,
                        const SamplingPattern& pattern,
                        const WeightedProjector& row_proj,
                        const WeightedProjector& col_proj, double noise_radius,
                        const SolverConfig& cfg = {});

/// Normalized recovery error ||estimate - truth||_F / ||truth||_F.
double nre(const Mat& estimate, const Mat& truth);

}  // namespace mwmc
