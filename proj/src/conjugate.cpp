#include "rhg/conjugate.hpp"

#include <cmath>

namespace rhg::conjugate {

namespace {

constexpr double kParallelTol = 1e-8;  // Gram-Schmidt rejection threshold

Vec flatten_pair(const Mat& xi, const Vec& eta) {
  Vec v(xi.size() + eta.size());
  int k = 0;
  for (int c = 0; c < xi.cols(); ++c)
    for (int r = 0; r < xi.rows(); ++r) v(k++) = xi(r, c);
  for (int j = 0; j < eta.size(); ++j) v(k++) = eta(j);
  return v;
}

}  // namespace

CylinderFrame cylinder_frame(const Covector& cov) {
  const GroupShape sh = cov.shape();
  const int hdim = sh.horizontal_dim();
  const double hn = cov.horizontal_norm();
  if (hn == 0.0) throw ZeroHorizontal("cylinder_frame: |(xi,eta)| = 0");

  // Gram-Schmidt of the canonical (xi,eta) basis against the radial direction,
  // in index order, skipping candidates that become numerically parallel.
  std::vector<Vec> basis;
  basis.push_back(flatten_pair(cov.xi, cov.eta) / hn);
  for (int i = 0; i < hdim && int(basis.size()) < hdim; ++i) {
    Vec cand = Vec::Zero(hdim);
    cand(i) = 1.0;
    for (const Vec& b : basis) cand -= b.dot(cand) * b;
    const double n = cand.norm();
    if (n < kParallelTol) continue;
    basis.push_back(cand / n);
  }

  CylinderFrame frame;
  frame.base = cov;
  for (size_t i = 1; i < basis.size(); ++i) {  // drop the radial direction itself
    Covector dir = zero_covector(sh);
    int k = 0;
    for (int c = 0; c < sh.p; ++c)
      for (int r = 0; r < sh.q; ++r) dir.xi(r, c) = basis[i](k++);
    for (int j = 0; j < sh.p; ++j) dir.eta(j) = basis[i](k++);
    frame.directions.push_back(std::move(dir));
  }
  for (int a = 0; a < sh.q; ++a) {
    Covector dir = zero_covector(sh);
    dir.tau(a) = 1.0;
    frame.directions.push_back(std::move(dir));
  }
  return frame;
}

namespace {

Covector cov_axpy(const Covector& c, double h, const Covector& d) {
  return {c.xi + h * d.xi, c.eta + h * d.eta, c.tau + h * d.tau};
}

// [d_s gamma, d_frame gamma] at step h (central differences).
Mat derivative_matrix(double s, const Covector& cov, const CylinderFrame& frame,
                      double h_s, double h_c) {
  const GroupShape sh = cov.shape();
  const int n = sh.full_dim();
  Mat M(n, n);
  M.col(0) = (flatten(extremal::geodesic(s + h_s, cov)) -
              flatten(extremal::geodesic(s - h_s, cov))) /
             (2.0 * h_s);
  for (size_t j = 0; j < frame.directions.size(); ++j) {
    const Covector& d = frame.directions[j];
    M.col(int(j) + 1) = (flatten(extremal::geodesic(s, cov_axpy(cov, h_c, d))) -
                         flatten(extremal::geodesic(s, cov_axpy(cov, -h_c, d)))) /
                        (2.0 * h_c);
  }
  return M;
}

}  // namespace

ConjugateReport numeric_conjugate_test(double s, const Covector& cov, double fd_step) {
  ConjugateReport rep;
  rep.time_tested = s;
  if (extremal::abnormal_test(cov)) {
    rep.verdict = Verdict::Conjugate;
    rep.method = Method::AbnormalTrivial;
    rep.determinant_value = 0.0;
    return rep;
  }

  const CylinderFrame frame = cylinder_frame(cov);
  const double h_s = fd_step * std::max(1.0, std::abs(s));
  const double h_c = fd_step * std::max(1.0, cov.horizontal_norm() + cov.tau.norm());
  const Mat M1 = derivative_matrix(s, cov, frame, h_s, h_c);
  const Mat M2 = derivative_matrix(s, cov, frame, 2.0 * h_s, 2.0 * h_c);
  Mat M = (4.0 * M1 - M2) / 3.0;  // Richardson: O(h^4) column entries

  const int n = int(M.cols());
  double max_cn = 0.0;
  for (int j = 0; j < n; ++j) max_cn = std::max(max_cn, M.col(j).norm());
  for (int j = 0; j < n; ++j) {
    const double cn = M.col(j).norm();
    // A column this far below the rest is a genuinely degenerate direction whose
    // finite-difference remnant is pure roundoff; normalizing it would amplify
    // noise into the determinant.
    if (cn < 1e-8 * std::max(1.0, max_cn)) {
      rep.determinant_value = 0.0;
      rep.verdict = Verdict::Conjugate;
      return rep;
    }
    M.col(j) /= cn;
  }
  rep.determinant_value = Eigen::PartialPivLU<Mat>(M).determinant();
  const double ad = std::abs(rep.determinant_value);
  if (ad < kDetTol)
    rep.verdict = Verdict::Conjugate;
  else if (ad <= kUndecidedBand)
    rep.verdict = Verdict::Undecided;
  else
    rep.verdict = Verdict::NotConjugate;
  return rep;
}

bool p1_criterion(const Covector& cov, double atol) {
  const GroupShape sh = cov.shape();
  if (sh.p != 1) throw WrongP("p1_criterion: requires p = 1");
  const double tn = cov.tau.norm();
  if (tn == 0.0) throw ZeroTau("p1_criterion: tau = 0");
  const double hn = cov.horizontal_norm();
  if (hn == 0.0) throw ZeroHorizontal("p1_criterion: |(xi,eta)| = 0");
  const Vec xi_tau = cov.xi.transpose() * cov.tau;
  const Mat p_perp_xi = cov.xi - cov.tau * (xi_tau.transpose() / (tn * tn));
  return std::abs(cov.eta(0)) * p_perp_xi.norm() < atol * hn;
}

ConjugateReport closed_form_report(const Covector& cov, double atol) {
  ConjugateReport rep;
  rep.method = Method::ClosedFormP1;
  rep.time_tested = extremal::cut_time(cov);
  rep.verdict = p1_criterion(cov, atol) ? Verdict::Conjugate : Verdict::NotConjugate;
  const Vec xi_tau = cov.xi.transpose() * cov.tau;
  const double tn = cov.tau.norm();
  const Mat p_perp_xi = cov.xi - cov.tau * (xi_tau.transpose() / (tn * tn));
  rep.determinant_value = std::abs(cov.eta(0)) * p_perp_xi.norm();
  return rep;
}

Mat build_mhat(const Covector& cov) {
  const GroupShape sh = cov.shape();
  if (sh.p != 1) throw WrongP("build_mhat: requires p = 1");
  if (sh.q < 2) throw InputError("build_mhat: requires q >= 2");
  const double tn = cov.tau.norm();
  if (tn == 0.0) throw ZeroTau("build_mhat: tau = 0");

  const Vec xi = cov.xi.col(0);
  const double eta = cov.eta(0);
  const double xi_dot_tau = xi.dot(cov.tau);
  const Vec v = xi - cov.tau * (xi_dot_tau / (tn * tn));  // P_tau^perp xi
  if (std::abs(eta) * v.norm() == 0.0)
    throw DegenerateFrame("build_mhat: requires eta != 0 and P_tau^perp xi != 0");

  const int q = sh.q;
  const int n = 2 * q - 1;
  Mat mhat = Mat::Zero(n, n);
  const double p_xi_sq = xi_dot_tau * xi_dot_tau / (tn * tn);  // |P_tau xi|^2

  if (q == 2) {
    mhat.block(0, 0, 2, 1) = v;
    mhat.block(0, 1, 2, 2) =
        -2.0 * (xi_dot_tau * Mat::Identity(2, 2) + cov.tau * xi.transpose());
    mhat.block(2, 1, 1, 2) = cov.tau.transpose();
    return mhat;
  }

  // Orthonormal completion omega_1 .. omega_{q-2} of Span{tau, v}^perp by
  // Gram-Schmidt over canonical basis vectors in index order.
  std::vector<Vec> basis = {cov.tau / tn, v / v.norm()};
  Mat omega(q, q - 2);
  int filled = 0;
  for (int i = 0; i < q && filled < q - 2; ++i) {
    Vec cand = Vec::Zero(q);
    cand(i) = 1.0;
    for (const Vec& b : basis) cand -= b.dot(cand) * b;
    const double nn = cand.norm();
    if (nn < kParallelTol) continue;
    cand /= nn;
    basis.push_back(cand);
    omega.col(filled++) = cand;
  }
  if (filled != q - 2) throw DegenerateFrame("build_mhat: frame completion failed");

  mhat.block(0, 0, q, q - 2) = omega;
  mhat.block(0, q - 2, q, 1) = v;
  mhat.block(0, q - 1, q, q) =
      -2.0 * (xi_dot_tau * Mat::Identity(q, q) + cov.tau * xi.transpose());
  mhat.block(q, q - 1, 1, q) = cov.tau.transpose();
  mhat.block(q + 1, 0, q - 2, q - 2) =
      -(xi_dot_tau / (tn * tn)) * (omega.transpose() * omega);
  mhat.block(q + 1, q - 1, q - 2, q) =
      (eta * eta + 3.0 * p_xi_sq) * omega.transpose();
  return mhat;
}

bool cutpoint_conjugate(const Mat& x, const Vec& t, const GroupShape& shape,
                        double sv_tol, double atol) {
  const GroupPoint g{x, Vec::Zero(x.cols()), t};
  const cutlocus::CutClassification cls = cutlocus::classify(g, sv_tol, atol);
  if (!cls.is_cut()) throw NotACutPoint("cutpoint_conjugate: point is not a cut point");
  if (shape.p >= 2) return true;
  if (x.norm() <= atol * std::max(1.0, t.norm())) return true;  // vertical point
  const auto [proj, perp] = matlin::proj_image(x, t, sv_tol);
  const Vec xdt = matlin::pinv(x, sv_tol) * t;
  const double watts = x.norm() * (perp.norm() - M_PI * xdt.squaredNorm());
  return std::abs(watts) <= atol * std::max(1.0, t.norm());
}

}  // namespace rhg::conjugate
