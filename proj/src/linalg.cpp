#include "mwmc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mwmc/rng.hpp"

namespace mwmc {

namespace {

// Snap threshold below which a principal angle is treated as exactly zero.
// The in-plane complement of a contained direction is numerically
// undetermined, so those directions come from the orthonormal completion.
constexpr double kZeroAngleSine = 1e-9;

void fix_svd_signs(Mat& u, Mat& v) {
  for (Index k = 0; k < u.cols(); ++k) {
    Index imax = 0;
    u.col(k).cwiseAbs().maxCoeff(&imax);
    if (u(imax, k) < 0.0) {
      u.col(k) *= -1.0;
      if (k < v.cols()) v.col(k) *= -1.0;
    }
  }
}

}  // namespace

SvdResult full_svd(const Mat& a) {
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdResult r{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  fix_svd_signs(r.U, r.V);
  return r;
}

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::BDCSVD<Mat>(a).singularValues()(0);
}

double nuclear_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::BDCSVD<Mat>(a).singularValues().sum();
}

OrthonormalBasis::OrthonormalBasis(Mat columns) : cols_(std::move(columns)) {
  if (cols_.cols() > cols_.rows())
    throw std::invalid_argument("OrthonormalBasis: more columns than rows");
  const Index k = cols_.cols();
  const double defect =
      (cols_.transpose() * cols_ - Mat::Identity(k, k)).norm();
  if (defect > kGramCheckTol)
    throw std::invalid_argument("OrthonormalBasis: columns not orthonormal");
}

AngleVector::AngleVector(Vec radians) : radians_(std::move(radians)) {
  constexpr double half_pi = 1.5707963267948966;
  for (Index i = 0; i < radians_.size(); ++i) {
    if (!(radians_(i) >= 0.0 && radians_(i) <= half_pi + 1e-12))
      throw std::invalid_argument("AngleVector: angle outside [0, pi/2]");
    if (i > 0 && radians_(i) > radians_(i - 1) + 1e-12)
      throw std::invalid_argument("AngleVector: angles must be non-increasing");
  }
}

AngleVector AngleVector::from_degrees(const Vec& degrees) {
  Vec r = degrees * (std::numbers::pi / 180.0);
  std::sort(r.begin(), r.end(), std::greater<double>());
  return AngleVector(std::move(r));
}

Vec AngleVector::degrees() const {
  return radians_ * (180.0 / std::numbers::pi);
}

Mat TransformBundle::core_block(Index row, Index col) const {
  const Index n = core.rows();
  const Index r = rank;
  const Index t = prior_dim - rank;
  const Index sizes[4] = {r, r, t, n - rank - prior_dim};
  Index off[4];
  off[0] = 0;
  for (int k = 1; k < 4; ++k) off[k] = off[k - 1] + sizes[k - 1];
  return core.block(off[row], off[col], sizes[row], sizes[col]);
}

AngleVector principal_angles(const OrthonormalBasis& a,
                             const OrthonormalBasis& b) {
  if (a.ambient() != b.ambient())
    throw std::invalid_argument("principal_angles: ambient dimension differs");
  if (a.dim() > b.dim())
    throw std::invalid_argument("principal_angles: dim(a) must be <= dim(b)");
  const Mat product = a.cols().transpose() * b.cols();
  Vec sv = Eigen::BDCSVD<Mat>(product).singularValues();
  Vec angles(a.dim());
  for (Index i = 0; i < a.dim(); ++i) {
    const double c = std::clamp(sv(i), 0.0, 1.0);
    // arccos cannot resolve angles below ~sqrt(eps); snap those to zero so
    // identical subspaces report exact zeros.
    const double angle = c >= 1.0 - 1e-14 ? 0.0 : std::acos(c);
    // singular values are non-increasing, so angles come out non-decreasing;
    // store them reversed.
    angles(a.dim() - 1 - i) = angle;
  }
  return AngleVector(std::move(angles));
}

OrthonormalBasis random_orthonormal(Index n, Index k, std::uint64_t seed) {
  if (k > n) throw std::invalid_argument("random_orthonormal: k > n");
  Mat g(n, k);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < k; ++j)
      g(i, j) = rng::gaussian(seed, static_cast<std::uint64_t>(i),
                              static_cast<std::uint64_t>(j), rng::kTestStream);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(n, k);
  const Mat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Index j = 0; j < k; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return OrthonormalBasis(std::move(q));
}

OrthonormalBasis build_prior_basis(const OrthonormalBasis& truth,
                                   const AngleVector& theta, Index prior_dim,
                                   std::uint64_t seed) {
  const Index n = truth.ambient();
  const Index r = truth.dim();
  if (theta.size() != r)
    throw std::invalid_argument("build_prior_basis: angle count != rank");
  if (prior_dim < r)
    throw std::invalid_argument("build_prior_basis: prior_dim < rank");
  if (r + prior_dim > n)
    throw std::invalid_argument(
        "build_prior_basis: ambient dimension too small (needs r + r' <= n)");

  const Mat& u = truth.cols();
  const Mat p_perp = Mat::Identity(n, n) - u * u.transpose();

  // Seeded complement directions for the rotated part, orthonormal within
  // span(truth)^perp.
  Mat g(n, r);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < r; ++j)
      g(i, j) = rng::gaussian(seed, static_cast<std::uint64_t>(i),
                              static_cast<std::uint64_t>(j),
                              rng::kPriorComplement);
  Eigen::HouseholderQR<Mat> qr1(p_perp * g);
  Mat w = qr1.householderQ() * Mat::Identity(n, r);
  {
    const Mat rr = qr1.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    for (Index j = 0; j < r; ++j)
      if (rr(j, j) < 0.0) w.col(j) *= -1.0;
  }

  Mat result(n, prior_dim);
  for (Index i = 0; i < r; ++i) {
    const double c = std::cos(theta[i]);
    const double s = std::sin(theta[i]);
    result.col(i) = c * u.col(i) + s * w.col(i);
  }

  const Index tail = prior_dim - r;
  if (tail > 0) {
    Mat g2(n, tail);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < tail; ++j)
        g2(i, j) = rng::gaussian(seed, static_cast<std::uint64_t>(i),
                                 static_cast<std::uint64_t>(j),
                                 rng::kPriorTail);
    // Project out both the true directions and the rotated complements.
    Mat span(n, 2 * r);
    span << u, w;
    g2 -= span * (span.transpose() * g2);
    Eigen::HouseholderQR<Mat> qr2(g2);
    Mat t = qr2.householderQ() * Mat::Identity(n, tail);
    const Mat rr = qr2.matrixQR().topRows(tail).triangularView<Eigen::Upper>();
    for (Index j = 0; j < tail; ++j)
      if (rr(j, j) < 0.0) t.col(j) *= -1.0;
    result.rightCols(tail) = t;
  }
  return OrthonormalBasis(std::move(result));
}

namespace detail {
void validate_weights(const Vec& w, const char* what) {
  for (Index i = 0; i < w.size(); ++i)
    if (!(w(i) > 0.0 && w(i) <= 1.0))
      throw std::invalid_argument(std::string(what) +
                                  ": weights must lie in (0, 1]");
}
}  // namespace detail

TransformBundle build_transform(const OrthonormalBasis& truth,
                                const OrthonormalBasis& prior,
                                const Vec& main_weights,
                                const Vec& tail_weights) {
  const Index n = truth.ambient();
  const Index r = truth.dim();
  const Index rp = prior.dim();
  if (prior.ambient() != n)
    throw std::invalid_argument("build_transform: ambient dimension differs");
  if (rp < r || r + rp > n)
    throw std::invalid_argument("build_transform: needs r <= r' and r + r' <= n");
  if (main_weights.size() != r || tail_weights.size() != rp - r)
    throw std::invalid_argument("build_transform: weight vector sizes");
  detail::validate_weights(main_weights, "build_transform");
  detail::validate_weights(tail_weights, "build_transform");

  // An input that already satisfies truth^T * prior = [diag(cos) | 0] keeps
  // its column pairing: per-direction weights attach by column index, and a
  // fresh SVD could rotate inside blocks of repeated angles. Anything else
  // is aligned here, pairing weights with angles in non-increasing order.
  const Mat product = truth.cols().transpose() * prior.cols();
  Mat off = product;
  for (Index i = 0; i < r; ++i) off(i, i) = 0.0;
  bool pre_aligned = off.cwiseAbs().maxCoeff() < 1e-10;
  for (Index i = 0; pre_aligned && i < r; ++i)
    if (product(i, i) < -1e-12) pre_aligned = false;

  Mat u_al, prior_al;
  if (pre_aligned) {
    u_al = truth.cols();
    prior_al = prior.cols();
  } else {
    Eigen::BDCSVD<Mat> svd(product,
                           Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat u_rot = svd.matrixU();  // r x r
    Mat p_rot = svd.matrixV();  // r' x r'
    // Reverse the paired columns: SVD sorts cosines descending, we want the
    // largest angle first.
    u_rot = u_rot.rowwise().reverse().eval();
    Mat head = p_rot.leftCols(r).rowwise().reverse();
    p_rot.leftCols(r) = head;
    u_al = truth.cols() * u_rot;
    prior_al = prior.cols() * p_rot;
  }

  // Cosines/sines recomputed from the aligned vectors; atan2(s, c) stays
  // accurate for tiny angles where arccos of a singular value does not.
  Vec cosines(r), sines(r);
  Mat complement(n, r);
  std::vector<Index> degenerate;
  for (Index i = 0; i < r; ++i) {
    const Vec tilde = prior_al.col(i);
    double c = u_al.col(i).dot(tilde);
    Vec resid = tilde - u_al * (u_al.transpose() * tilde);
    const double s = resid.norm();
    if (s <= kZeroAngleSine) {
      cosines(i) = 1.0;
      sines(i) = 0.0;
      complement.col(i).setZero();  // filled from the completion below
      degenerate.push_back(i);
    } else {
      cosines(i) = c;
      sines(i) = s;
      complement.col(i) = -resid / s;
    }
  }

  const Index tail = rp - r;
  Mat tail_basis(n, tail);
  if (tail > 0) {
    const Mat t = prior_al.rightCols(tail);
    tail_basis = -(t - u_al * (u_al.transpose() * t));
  }

  // Assemble the non-degenerate columns, polish to exact orthonormality and
  // take the completion for everything else.
  const Index live = r - static_cast<Index>(degenerate.size());
  Mat stack(n, r + live + tail);
  stack.leftCols(r) = u_al;
  Index pos = r;
  for (Index i = 0; i < r; ++i)
    if (sines(i) > 0.0) stack.col(pos++) = complement.col(i);
  if (tail > 0) stack.rightCols(tail) = tail_basis;

  Eigen::HouseholderQR<Mat> qr(stack);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  for (Index j = 0; j < stack.cols(); ++j)
    if (q.col(j).dot(stack.col(j)) < 0.0) q.col(j) *= -1.0;

  Mat frame(n, n);
  frame.leftCols(r) = q.leftCols(r);
  pos = r;
  Index spare = r + live + tail;  // first unused completion column
  for (Index i = 0; i < r; ++i) {
    if (sines(i) > 0.0)
      frame.col(r + i) = q.col(pos++);
    else
      frame.col(r + i) = q.col(spare++);
  }
  if (tail > 0) frame.block(0, 2 * r, n, tail) = q.block(0, r + live, n, tail);
  if (spare < n) frame.rightCols(n - spare) = q.rightCols(n - spare);

  // Per-direction blocks of the rotation and the triangular core.
  Vec delta(r);
  for (Index i = 0; i < r; ++i) {
    const double lam = main_weights(i);
    delta(i) = std::sqrt(lam * lam * cosines(i) * cosines(i) +
                         sines(i) * sines(i));
  }

  Mat rotation = Mat::Identity(n, n);
  Mat core = Mat::Identity(n, n);
  for (Index i = 0; i < r; ++i) {
    const double lam = main_weights(i);
    const double c = cosines(i), s = sines(i);
    const double a = lam * c * c + s * s;
    const double b = (1.0 - lam) * s * c;
    rotation(i, i) = a / delta(i);
    rotation(i, r + i) = -b / delta(i);
    rotation(r + i, i) = b / delta(i);
    rotation(r + i, r + i) = a / delta(i);
    core(i, i) = delta(i);
    core(i, r + i) = (1.0 - lam * lam) * s * c / delta(i);
    core(r + i, r + i) = lam / delta(i);
  }
  for (Index j = 0; j < tail; ++j) core(2 * r + j, 2 * r + j) = tail_weights(j);

  TransformBundle bundle;
  bundle.frame = std::move(frame);
  bundle.rotation = std::move(rotation);
  bundle.core = std::move(core);
  bundle.delta = std::move(delta);
  bundle.cosines = std::move(cosines);
  bundle.sines = std::move(sines);
  bundle.rank = r;
  bundle.prior_dim = rp;
  return bundle;
}

}  // namespace mwmc
