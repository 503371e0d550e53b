#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace rhg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Error taxonomy: one exception type per contract violation, all rooted here so
// callers can catch the whole family when they only care about "domain error".
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error { using Error::Error; };
struct ZeroTau : Error { using Error::Error; };
struct NonpositiveR : Error { using Error::Error; };
struct NegativePhi : Error { using Error::Error; };
struct ZeroHorizontal : Error { using Error::Error; };
struct InfiniteCutTime : Error { using Error::Error; };
struct OriginPoint : Error { using Error::Error; };
struct NotACutPoint : Error { using Error::Error; };
struct NotUniqueCutPoint : Error { using Error::Error; };
struct ZeroX : Error { using Error::Error; };
struct ZeroT : Error { using Error::Error; };
struct WrongP : Error { using Error::Error; };
struct DegenerateFrame : Error { using Error::Error; };
struct OffLevelSet : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct InputError : Error { using Error::Error; };

struct GroupShape {
  int q = 1;
  int p = 1;
  bool operator==(const GroupShape&) const = default;
  int horizontal_dim() const { return q * p + p; }
  int vertical_dim() const { return q; }
  int full_dim() const { return q * p + p + q; }
};

// (xi, eta) block of the horizontal layer; also reused for controls (u, v).
struct HorizontalPair {
  Mat xi;   // q x p
  Vec eta;  // p

  double squared_norm() const { return xi.squaredNorm() + eta.squaredNorm(); }
  double norm() const { return std::sqrt(squared_norm()); }
};

inline HorizontalPair operator+(const HorizontalPair& a, const HorizontalPair& b) {
  return {a.xi + b.xi, a.eta + b.eta};
}
inline HorizontalPair operator-(const HorizontalPair& a, const HorizontalPair& b) {
  return {a.xi - b.xi, a.eta - b.eta};
}
inline HorizontalPair operator*(double s, const HorizontalPair& a) {
  return {s * a.xi, s * a.eta};
}

struct GroupPoint {
  Mat x;  // q x p
  Vec y;  // p
  Vec t;  // q

  GroupShape shape() const { return {int(x.rows()), int(x.cols())}; }
  double norm() const {
    return std::sqrt(x.squaredNorm() + y.squaredNorm() + t.squaredNorm());
  }
};

struct Covector {
  Mat xi;   // q x p
  Vec eta;  // p
  Vec tau;  // q

  GroupShape shape() const { return {int(xi.rows()), int(xi.cols())}; }
  HorizontalPair horizontal() const { return {xi, eta}; }
  double horizontal_norm() const { return std::sqrt(xi.squaredNorm() + eta.squaredNorm()); }
};

inline GroupPoint zero_point(const GroupShape& s) {
  return {Mat::Zero(s.q, s.p), Vec::Zero(s.p), Vec::Zero(s.q)};
}
inline Covector zero_covector(const GroupShape& s) {
  return {Mat::Zero(s.q, s.p), Vec::Zero(s.p), Vec::Zero(s.q)};
}

inline void check_shape(const GroupShape& a, const GroupShape& b, const char* what) {
  if (!(a == b)) throw ShapeMismatch(std::string(what) + ": shapes differ");
}

// Column-major flattening: vec(x), then y, then t.  This fixed ordering is the
// interchange convention used by serialization, finite differences and the oracles.
inline Vec flatten(const GroupPoint& g) {
  const GroupShape s = g.shape();
  Vec out(s.full_dim());
  int k = 0;
  for (int c = 0; c < s.p; ++c)
    for (int r = 0; r < s.q; ++r) out(k++) = g.x(r, c);
  for (int j = 0; j < s.p; ++j) out(k++) = g.y(j);
  for (int a = 0; a < s.q; ++a) out(k++) = g.t(a);
  return out;
}

inline Vec flatten(const Covector& c) {
  const GroupShape s = c.shape();
  Vec out(s.full_dim());
  int k = 0;
  for (int col = 0; col < s.p; ++col)
    for (int r = 0; r < s.q; ++r) out(k++) = c.xi(r, col);
  for (int j = 0; j < s.p; ++j) out(k++) = c.eta(j);
  for (int a = 0; a < s.q; ++a) out(k++) = c.tau(a);
  return out;
}

inline GroupPoint unflatten_point(const Vec& v, const GroupShape& s) {
  GroupPoint g = zero_point(s);
  int k = 0;
  for (int c = 0; c < s.p; ++c)
    for (int r = 0; r < s.q; ++r) g.x(r, c) = v(k++);
  for (int j = 0; j < s.p; ++j) g.y(j) = v(k++);
  for (int a = 0; a < s.q; ++a) g.t(a) = v(k++);
  return g;
}

inline Covector unflatten_covector(const Vec& v, const GroupShape& s) {
  Covector c = zero_covector(s);
  int k = 0;
  for (int col = 0; col < s.p; ++col)
    for (int r = 0; r < s.q; ++r) c.xi(r, col) = v(k++);
  for (int j = 0; j < s.p; ++j) c.eta(j) = v(k++);
  for (int a = 0; a < s.q; ++a) c.tau(a) = v(k++);
  return c;
}

}  // namespace rhg
