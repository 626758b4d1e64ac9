#include "mwmc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mwmc {

Mat svt(const Mat& m, double tau) {
  if (tau < 0.0) throw std::invalid_argument("svt: tau must be >= 0");
  if (tau == 0.0) return m;
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  Index k = 0;
  while (k < sv.size() && sv(k) > tau) ++k;
  if (k == 0) return Mat::Zero(m.rows(), m.cols());
  const Vec kept = sv.head(k).array() - tau;
  return svd.matrixU().leftCols(k) * kept.asDiagonal() *
         svd.matrixV().leftCols(k).transpose();
}

double nre(const Mat& estimate, const Mat& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw std::invalid_argument("nre: shape mismatch");
  const double denom = truth.norm();
  if (denom == 0.0) throw std::invalid_argument("nre: truth is zero");
  return (estimate - truth).norm() / denom;
}

namespace {

// Projection of the masked entries onto the F-ball of radius e around Y;
// identity off the mask. With e = 0 observed entries are pinned to Y.
void project_data_ball(Mat& z, const Mat& y, const Mat& mask, double e) {
  const Mat deviation = (mask.array() * z.array() - y.array()).matrix();
  const double dist = deviation.norm();
  if (dist <= e) return;
  const double shrink = e == 0.0 ? 1.0 : 1.0 - e / dist;
  z -= shrink * deviation;
}

// Projection onto the spectral-norm unit ball, written through the nuclear
// prox: clip(A) = A - svt(A, 1).
Mat spectral_ball_project(const Mat& a) { return a - svt(a, 1.0); }

}  // namespace

Solution solve_weighted(const NoisySample& sample,
                        const SamplingPattern& pattern,
                        const WeightedProjector& row_proj,
                        const WeightedProjector& col_proj, double noise_radius,
                        const SolverConfig& cfg) {
  const Mat& y = sample.values;
  const Mat& mask = pattern.mask;
  if (y.rows() != mask.rows() || y.cols() != mask.cols())
    throw std::invalid_argument("solve_weighted: shape mismatch");
  if (noise_radius < 0.0)
    throw std::invalid_argument("solve_weighted: noise radius must be >= 0");
  if (cfg.max_iters < 1)
    throw std::invalid_argument("solve_weighted: max_iters must be >= 1");
  if (mask.sum() == 0.0)
    throw std::invalid_argument("solve_weighted: empty mask, nothing observed");

  const Mat& qu = row_proj.q;
  const Mat& qv = col_proj.q;
  const Index n = y.rows();

  // ||Z -> Q_U Z Q_V|| = ||Q_U|| ||Q_V|| = 1, so any sigma*tau < 1 works.
  const double step = 0.99;
  double rho = cfg.penalty_rho;
  double sigma = step * rho;
  double tau = step / rho;

  Mat z = y;  // observed entries, zeros elsewhere
  Mat z_bar = z;
  Mat w = Mat::Zero(n, n);

  const double y_norm = std::max(y.norm(), 1.0);
  double rel_primal = 1.0, rel_dual = 1.0;
  bool converged = false;
  int it = 0;
  int adaptations = 0;

  while (it < cfg.max_iters) {
    ++it;
    const Mat w_prev = w;
    w = spectral_ball_project(w + sigma * (qu * z_bar * qv));

    const Mat z_prev = z;
    z = z_prev - tau * (qu * w * qv);
    project_data_ball(z, y, mask, noise_radius);
    z_bar = 2.0 * z - z_prev;

    rel_primal = (z_prev - z).norm() / std::max(z.norm(), y_norm);
    rel_dual = (w_prev - w).norm() / std::max(w.norm(), 1.0);
    if (rel_primal <= cfg.primal_tol && rel_dual <= cfg.dual_tol) {
      converged = true;
      break;
    }

    if (cfg.adaptive && it % 10 == 0 && adaptations < 40) {
      bool changed = false;
      if (rel_primal > cfg.adapt_ratio * rel_dual && rho > 1e-3) {
        rho /= cfg.adapt_factor;  // larger primal step
        changed = true;
      } else if (rel_dual > cfg.adapt_ratio * rel_primal && rho < 1e3) {
        rho *= cfg.adapt_factor;  // larger dual step
        changed = true;
      }
      if (changed) {
        sigma = step * rho;
        tau = step / rho;
        ++adaptations;
      }
    }
  }

  Solution sol;
  sol.objective = nuclear_norm(qu * z * qv);
  sol.estimate = std::move(z);
  sol.iters = it;
  sol.converged = converged;
  sol.primal_residual = rel_primal;
  sol.dual_residual = rel_dual;
  return sol;
}

}  // namespace mwmc
