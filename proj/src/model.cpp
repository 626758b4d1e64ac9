#include "mwmc/model.hpp"

#include <stdexcept>

namespace mwmc {

LowRankModel LowRankModel::truncate(const Mat& x, Index rank) {
  if (x.rows() != x.cols())
    throw std::invalid_argument("LowRankModel: matrix must be square");
  if (rank < 1 || rank > x.rows())
    throw std::invalid_argument("LowRankModel: rank out of range");
  SvdResult svd = full_svd(x);
  OrthonormalBasis left(svd.U.leftCols(rank));
  OrthonormalBasis right(svd.V.leftCols(rank));
  Vec sv = svd.singular_values.head(rank);
  Mat truncated = left.cols() * sv.asDiagonal() * right.cols().transpose();
  return LowRankModel{x, std::move(left), std::move(right), std::move(sv),
                      x - truncated};
}

PriorSubspaces PriorSubspaces::align(const LowRankModel& model,
                                     const Mat& left_raw,
                                     const Mat& right_raw) {
  auto align_one = [&](const OrthonormalBasis& truth, const Mat& raw) {
    OrthonormalBasis basis(raw);
    const Mat product = truth.cols().transpose() * basis.cols();
    Eigen::BDCSVD<Mat> svd(product, Eigen::ComputeFullV);
    Mat rot = svd.matrixV();  // r' x r', principal directions first
    // Largest angle first, to match the stored angle ordering.
    Mat head = rot.leftCols(truth.dim()).rowwise().reverse();
    rot.leftCols(truth.dim()) = head;
    OrthonormalBasis aligned(basis.cols() * rot);
    AngleVector angles = principal_angles(truth, aligned);
    return std::make_pair(std::move(aligned), std::move(angles));
  };
  auto [lp, la] = align_one(model.left, left_raw);
  auto [rp, ra] = align_one(model.right, right_raw);
  return PriorSubspaces{std::move(lp), std::move(rp), std::move(la),
                        std::move(ra)};
}

WeightSpec WeightSpec::ones(Index rank, Index prior_dim) {
  return WeightSpec{Vec::Ones(rank), Vec::Ones(prior_dim - rank),
                    Vec::Ones(rank), Vec::Ones(prior_dim - rank)};
}

WeightSpec WeightSpec::uniform(double row_w, double col_w, Index rank,
                               Index prior_dim) {
  return WeightSpec{Vec::Constant(rank, row_w),
                    Vec::Constant(prior_dim - rank, row_w),
                    Vec::Constant(rank, col_w),
                    Vec::Constant(prior_dim - rank, col_w)};
}

void WeightSpec::validate() const {
  detail::validate_weights(row_main, "WeightSpec.row_main");
  detail::validate_weights(row_tail, "WeightSpec.row_tail");
  detail::validate_weights(col_main, "WeightSpec.col_main");
  detail::validate_weights(col_tail, "WeightSpec.col_tail");
}

namespace {

WeightedProjector projector_from_basis(const OrthonormalBasis& prior,
                                       const Vec& main_weights,
                                       const Vec& tail_weights) {
  detail::validate_weights(main_weights, "make_weighted_projector");
  detail::validate_weights(tail_weights, "make_weighted_projector");
  const Index rp = prior.dim();
  if (main_weights.size() + tail_weights.size() != rp)
    throw std::invalid_argument("make_weighted_projector: weight sizes");
  Vec w(rp);
  w << main_weights, tail_weights;
  const Index n = prior.ambient();
  const Mat& u = prior.cols();
  // Q = I + U (diag(w) - I) U^T keeps the complement exactly untouched.
  Mat q = Mat::Identity(n, n) +
          u * (w.array() - 1.0).matrix().asDiagonal() * u.transpose();
  Mat q_inv = Mat::Identity(n, n) +
              u * (w.array().inverse() - 1.0).matrix().asDiagonal() *
                  u.transpose();
  return WeightedProjector{std::move(q), std::move(q_inv), std::nullopt};
}

}  // namespace

WeightedProjector make_weighted_projector(const OrthonormalBasis& prior,
                                          const Vec& main_weights,
                                          const Vec& tail_weights) {
  return projector_from_basis(prior, main_weights, tail_weights);
}

WeightedProjector make_weighted_projector(const OrthonormalBasis& truth,
                                          const OrthonormalBasis& prior,
                                          const Vec& main_weights,
                                          const Vec& tail_weights) {
  WeightedProjector p = projector_from_basis(prior, main_weights, tail_weights);
  p.bundle = build_transform(truth, prior, main_weights, tail_weights);
  return p;
}

SupportProjector::SupportProjector(const OrthonormalBasis& left,
                                   const OrthonormalBasis& right)
    : p_left_(left.projector()), p_right_(right.projector()) {
  if (left.ambient() != right.ambient())
    throw std::invalid_argument("SupportProjector: ambient dimension differs");
}

Mat project_support(const Mat& z, const SupportProjector& s) {
  if (z.rows() != s.p_left().rows() || z.cols() != s.p_right().rows())
    throw std::invalid_argument("project_support: shape mismatch");
  const Mat pu_z = s.p_left() * z;
  return pu_z + z * s.p_right() - pu_z * s.p_right();
}

Mat project_support_complement(const Mat& z, const SupportProjector& s) {
  if (z.rows() != s.p_left().rows() || z.cols() != s.p_right().rows())
    throw std::invalid_argument("project_support_complement: shape mismatch");
  const Index n = z.rows();
  const Mat pu_perp = Mat::Identity(n, n) - s.p_left();
  const Mat pv_perp = Mat::Identity(n, n) - s.p_right();
  return pu_perp * z * pv_perp;
}

}  // namespace mwmc
