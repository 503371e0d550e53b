#include "rhg/matlin.hpp"

#include <cmath>

namespace rhg::matlin {

Mat proj_tau(const Vec& tau) {
  const double n2 = tau.squaredNorm();
  if (n2 == 0.0) throw ZeroTau("proj_tau: |tau| = 0");
  return (tau * tau.transpose()) / n2;
}

Mat proj_tau_perp(const Vec& tau) {
  return Mat::Identity(tau.size(), tau.size()) - proj_tau(tau);
}

Mat pinv(const Mat& x, double sv_tol) {
  if (x.norm() == 0.0) return Mat::Zero(x.cols(), x.rows());
  Eigen::JacobiSVD<Mat> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double cutoff = sv_tol * sv(0);
  Vec inv = Vec::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

std::pair<Vec, Vec> proj_image(const Mat& x, const Vec& t, double sv_tol) {
  if (x.norm() == 0.0) return {Vec::Zero(t.size()), t};
  Eigen::JacobiSVD<Mat> svd(x, Eigen::ComputeThinU);
  const Vec& sv = svd.singularValues();
  const double cutoff = sv_tol * sv(0);
  Vec proj = Vec::Zero(t.size());
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) {
      const Vec u = svd.matrixU().col(i);
      proj += u.dot(t) * u;
    }
  }
  return {proj, t - proj};
}

int image_rank(const Mat& x, double sv_tol) {
  if (x.norm() == 0.0) return 0;
  Eigen::JacobiSVD<Mat> svd(x);
  const Vec& sv = svd.singularValues();
  const double cutoff = sv_tol * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return rank;
}

Mat kernel_basis(const Mat& x, double sv_tol) {
  const int p = int(x.cols());
  if (x.norm() == 0.0) return Mat::Identity(p, p);
  Eigen::JacobiSVD<Mat> svd(x, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double cutoff = sv_tol * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(p - rank);
}

HorizontalPair apply_A(const Vec& tau, const HorizontalPair& pair) {
  return {tau * pair.eta.transpose(), -pair.xi.transpose() * tau};
}

namespace {

// sin(x)/x and (1-cos(x))/x^2 with series branches so the tau -> 0 limit is smooth.
double sinc(double x) {
  const double a = std::abs(x);
  if (a < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

double versinc(double x) {
  const double a = std::abs(x);
  if (a < 1e-4) {
    const double x2 = x * x;
    return 0.5 - x2 / 24.0 + x2 * x2 / 720.0;
  }
  return (1.0 - std::cos(x)) / (x * x);
}

}  // namespace

HorizontalPair exp_A(double s, const Vec& tau, const HorizontalPair& pair) {
  const double tn = tau.norm();
  if (tn == 0.0) return pair;
  const double x = tn * s;
  const double c1 = s * sinc(x);        // sin(|tau| s)/|tau|
  const double c2 = s * s * versinc(x); // (1 - cos(|tau| s))/|tau|^2
  const HorizontalPair a1 = apply_A(tau, pair);
  const Mat ttx = tau * (tau.transpose() * pair.xi);
  return {pair.xi - c1 * a1.xi - c2 * ttx,
          pair.eta - c1 * a1.eta - c2 * (tn * tn) * pair.eta};
}

}  // namespace rhg::matlin
