#pragma once

#include <random>

#include "rhg/types.hpp"

namespace testutil {

using rhg::Covector;
using rhg::GroupPoint;
using rhg::GroupShape;
using rhg::HorizontalPair;
using rhg::Mat;
using rhg::Vec;

inline Mat random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = g(rng);
  return m;
}

inline Vec random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

inline Vec random_unit(std::mt19937_64& rng, int n) {
  Vec v;
  do {
    v = random_vector(rng, n);
  } while (v.norm() < 1e-6);
  return v / v.norm();
}

inline Covector random_covector(std::mt19937_64& rng, const GroupShape& sh) {
  return {random_matrix(rng, sh.q, sh.p), random_vector(rng, sh.p),
          random_vector(rng, sh.q)};
}

// Covector with unit horizontal speed and |tau| = tau_norm (admissible when
// tau_norm > 0 and the horizontal part is generic).
inline Covector random_unit_covector(std::mt19937_64& rng, const GroupShape& sh,
                                     double tau_norm) {
  Covector c = random_covector(rng, sh);
  const double hn = c.horizontal_norm();
  c.xi /= hn;
  c.eta /= hn;
  c.tau = tau_norm * random_unit(rng, sh.q);
  return c;
}

// Unit-speed covector kept away from the degenerate strata: |eta| and (when
// q >= 2, where it is not identically zero) the tau-orthogonal part of xi both
// at least 0.3 after normalization.  Near those strata the cut endpoint is
// (nearly) conjugate and numeric solvers flatten out.
inline Covector generic_cut_covector(std::mt19937_64& rng, const GroupShape& sh,
                                     double tau_norm) {
  for (;;) {
    Covector c = random_unit_covector(rng, sh, tau_norm);
    if (c.eta.norm() < 0.3) continue;
    if (sh.q >= 2) {
      const Vec that = c.tau / c.tau.norm();
      if ((c.xi - that * (that.transpose() * c.xi)).norm() < 0.3) continue;
    }
    return c;
  }
}

inline GroupPoint random_point(std::mt19937_64& rng, const GroupShape& sh) {
  return {random_matrix(rng, sh.q, sh.p), random_vector(rng, sh.p),
          random_vector(rng, sh.q)};
}

inline double point_gap(const GroupPoint& a, const GroupPoint& b) {
  return (rhg::flatten(a) - rhg::flatten(b)).norm();
}

inline double pair_gap(const HorizontalPair& a, const HorizontalPair& b) {
  return (a - b).norm();
}

}  // namespace testutil
