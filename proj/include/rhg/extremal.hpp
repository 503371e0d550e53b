#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "rhg/matlin.hpp"
#include "rhg/types.hpp"

namespace rhg::extremal {

struct Tuv {
  double T, U, V;
};

// T(phi) = sin(phi)/phi, U(phi) = (phi - sin phi cos phi)/(4 phi^2),
// V(phi) = (sin phi - phi cos phi)/(2 phi^2), with their limits at 0.
// Relative accuracy 1e-12 on [0, 1e3].  Throws NegativePhi for phi < 0.
Tuv tuv(double phi);

// Closed-form normal extremal from the origin; straight line (s xi, s eta, 0) at tau = 0.
GroupPoint geodesic(double s, const Covector& cov);

// Control e^{-s A_tau}(xi, eta) realizing the extremal.
HorizontalPair control(double s, const Covector& cov);

inline constexpr double kInfiniteCutTime = std::numeric_limits<double>::infinity();

// 2*pi/|tau| for non-line extremals, +infinity for Euclidean lines.
double cut_time(const Covector& cov);

// Endpoint at s = 2*pi/|tau| in closed form (y component is exactly zero).
GroupPoint endpoint_at_cut(const Covector& cov);

// True iff the extremal is a Euclidean line (never loses optimality).
bool is_line(const Covector& cov);

// Certificate sigma (unit, in (Im xi)^perp) when the curve is abnormal, none otherwise.
std::optional<Vec> abnormal_test(const Covector& cov,
                                 double sv_tol = matlin::kDefaultSvTol);

struct FlowSample {
  double s;
  GroupPoint point;
  Covector cov;
};

// RK4 integration of the canonical Hamiltonian system of H = (|u|^2 + |v|^2)/2
// written in the left-invariant frame; independent cross-check of `geodesic`.
std::vector<FlowSample> hamiltonian_flow(double s_end, const Covector& cov, int steps);

// Hamiltonian at the origin fiber: H(0, cov) = |(xi,eta)|^2 / 2.
double hamiltonian_at_origin(const Covector& cov);

// Max over (time, sigma) of |<P, d_sigma X>| along the flow of a one-parameter
// family of covectors on the level set H = 1/2; expected ~0 (Liouville form).
double liouville_residual(const std::function<Covector(double)>& family,
                          const std::vector<double>& sigmas,
                          const std::vector<double>& times,
                          int flow_steps = 2000,
                          double sigma_step = 1e-5);

struct ExtremalArc {
  Covector cov;
  double s_end = 1.0;

  GroupPoint at(double s) const { return geodesic(s, cov); }
  HorizontalPair control_at(double s) const { return control(s, cov); }
  GroupPoint endpoint() const { return geodesic(s_end, cov); }
};

}  // namespace rhg::extremal
