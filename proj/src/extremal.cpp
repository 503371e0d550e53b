#include "rhg/extremal.hpp"

#include <cmath>

#include "rhg/group.hpp"

namespace rhg::extremal {

namespace {

// Series evaluation below this phi kills the catastrophic cancellation in U and V.
constexpr double kSeriesPhi = 0.1;

Tuv tuv_any_sign(double phi) {
  const double a = std::abs(phi);
  if (a < kSeriesPhi) {
    const double p2 = phi * phi;
    const double T = 1.0 - p2 / 6.0 + p2 * p2 / 120.0 - p2 * p2 * p2 / 5040.0 +
                     p2 * p2 * p2 * p2 / 362880.0;
    const double U =
        phi * (1.0 / 6.0 + p2 * (-1.0 / 30.0 + p2 * (1.0 / 315.0 +
               p2 * (-1.0 / 5670.0 + p2 / 155925.0))));
    const double V =
        phi * (1.0 / 6.0 + p2 * (-1.0 / 60.0 + p2 * (1.0 / 1680.0 +
               p2 * (-1.0 / 90720.0 + p2 / 7983360.0))));
    return {T, U, V};
  }
  const double sp = std::sin(phi);
  const double cp = std::cos(phi);
  return {sp / phi, (phi - sp * cp) / (4.0 * phi * phi),
          (sp - phi * cp) / (2.0 * phi * phi)};
}

}  // namespace

Tuv tuv(double phi) {
  if (phi < 0.0) throw NegativePhi("tuv: phi must be >= 0");
  return tuv_any_sign(phi);
}

GroupPoint geodesic(double s, const Covector& cov) {
  const GroupShape sh = cov.shape();
  const double tn = cov.tau.norm();
  if (tn == 0.0) return {s * cov.xi, s * cov.eta, Vec::Zero(sh.q)};

  const double phi = 0.5 * tn * s;
  const auto [T, U, V] = tuv_any_sign(phi);
  const double cp = std::cos(phi);
  const double sp = std::sin(phi);

  const Vec tau_hat = cov.tau / tn;
  const Vec xi_tau = cov.xi.transpose() * cov.tau;         // p-vector xi^T tau
  const Mat p_xi = cov.tau * (xi_tau.transpose() / (tn * tn));  // P_tau xi
  const Mat p_perp_xi = cov.xi - p_xi;

  const Mat x = s * T * (cp * p_xi - sp * tau_hat * cov.eta.transpose()) + s * p_perp_xi;
  const Vec y = s * T * (cp * cov.eta + (sp / tn) * xi_tau);
  const double radial2 = p_xi.squaredNorm() + cov.eta.squaredNorm();
  const Vec t = s * s * U * radial2 * tau_hat +
                s * s * V * (p_perp_xi * (-sp * cov.eta + (cp / tn) * xi_tau));
  return {x, y, t};
}

HorizontalPair control(double s, const Covector& cov) {
  return matlin::exp_A(s, cov.tau, {cov.xi, cov.eta});
}

namespace {

constexpr double kVanishTol = 1e-12;  // relative tolerance of the line/non-line dichotomy

struct LineParts {
  double tn;        // |tau|
  double rot2;      // |P_tau xi|^2 + |eta|^2, the rotating energy
  double total2;    // |(xi, eta)|^2
  Mat p_perp_xi;
};

LineParts line_parts(const Covector& cov) {
  LineParts lp;
  lp.tn = cov.tau.norm();
  lp.total2 = cov.xi.squaredNorm() + cov.eta.squaredNorm();
  if (lp.total2 == 0.0) throw ZeroHorizontal("covector has |(xi,eta)| = 0");
  if (lp.tn == 0.0) {
    lp.rot2 = cov.eta.squaredNorm();
    lp.p_perp_xi = cov.xi;
    return lp;
  }
  const Vec xi_tau = cov.xi.transpose() * cov.tau;
  const Mat p_xi = cov.tau * (xi_tau.transpose() / (lp.tn * lp.tn));
  lp.p_perp_xi = cov.xi - p_xi;
  lp.rot2 = p_xi.squaredNorm() + cov.eta.squaredNorm();
  return lp;
}

}  // namespace

double cut_time(const Covector& cov) {
  const LineParts lp = line_parts(cov);
  if (lp.tn == 0.0) return kInfiniteCutTime;
  if (lp.rot2 <= kVanishTol * lp.total2) return kInfiniteCutTime;
  return 2.0 * M_PI / lp.tn;
}

GroupPoint endpoint_at_cut(const Covector& cov) {
  const double tcut = cut_time(cov);
  if (!std::isfinite(tcut)) throw InfiniteCutTime("endpoint_at_cut: cut time is infinite");
  const double tn = cov.tau.norm();
  const Vec tau_hat = cov.tau / tn;
  const Vec xi_tau = cov.xi.transpose() * cov.tau;
  const Mat p_xi = cov.tau * (xi_tau.transpose() / (tn * tn));
  const Mat p_perp_xi = cov.xi - p_xi;

  const Mat x = (2.0 * M_PI / tn) * p_perp_xi;
  const Vec y = Vec::Zero(cov.shape().p);
  const double radial2 = p_xi.squaredNorm() + cov.eta.squaredNorm();
  const Vec t = (M_PI / (tn * tn)) * radial2 * tau_hat -
                (2.0 * M_PI / (tn * tn)) * (p_perp_xi * (xi_tau / tn));
  return {x, y, t};
}

bool is_line(const Covector& cov) {
  const LineParts lp = line_parts(cov);
  if (lp.tn == 0.0) return true;
  return lp.rot2 <= kVanishTol * lp.total2 && lp.p_perp_xi.norm() > 0.0;
}

std::optional<Vec> abnormal_test(const Covector& cov, double sv_tol) {
  const GroupShape sh = cov.shape();
  const double hn = cov.horizontal_norm();
  if (hn == 0.0) throw ZeroHorizontal("abnormal_test: |(xi,eta)| = 0");
  if (sh.q == 1) return std::nullopt;  // q = 1: every extremal is strictly normal
  if (cov.eta.norm() > kVanishTol * hn) return std::nullopt;
  const Vec xi_tau = cov.xi.transpose() * cov.tau;
  if (xi_tau.norm() > kVanishTol * hn * (1.0 + cov.tau.norm())) return std::nullopt;
  if (matlin::image_rank(cov.xi, sv_tol) >= sh.q) return std::nullopt;
  Eigen::JacobiSVD<Mat> svd(cov.xi, Eigen::ComputeFullU);
  return svd.matrixU().col(sh.q - 1);  // smallest-singular-value direction in (Im xi)^perp
}

namespace {

struct FlowState {
  GroupPoint g;
  Covector c;
};

// Canonical equations of H = (|u|^2+|v|^2)/2 with u = xi - tau y^T / 2 (entrywise
// u_{ak} = xi_{ak} - y_k tau_a / 2) and v = eta + x^T tau / 2:
//   x' = u, y' = v, t' = Q((x,y),(u,v)),
//   xi' = -tau v^T / 2, eta' = u^T tau / 2, tau' = 0.
FlowState flow_rhs(const FlowState& st) {
  const Mat u = st.c.xi - 0.5 * st.c.tau * st.g.y.transpose();
  const Vec v = st.c.eta + 0.5 * st.g.x.transpose() * st.c.tau;
  FlowState d;
  d.g.x = u;
  d.g.y = v;
  d.g.t = group::q_form({st.g.x, st.g.y}, {u, v});
  d.c.xi = -0.5 * st.c.tau * v.transpose();
  d.c.eta = 0.5 * u.transpose() * st.c.tau;
  d.c.tau = Vec::Zero(st.c.tau.size());
  return d;
}

FlowState flow_axpy(const FlowState& a, double h, const FlowState& d) {
  return {{a.g.x + h * d.g.x, a.g.y + h * d.g.y, a.g.t + h * d.g.t},
          {a.c.xi + h * d.c.xi, a.c.eta + h * d.c.eta, a.c.tau + h * d.c.tau}};
}

}  // namespace

std::vector<FlowSample> hamiltonian_flow(double s_end, const Covector& cov, int steps) {
  if (steps < 1) throw InputError("hamiltonian_flow: steps >= 1");
  const GroupShape sh = cov.shape();
  const double h = s_end / double(steps);
  FlowState st{zero_point(sh), cov};
  std::vector<FlowSample> out;
  out.reserve(steps + 1);
  out.push_back({0.0, st.g, st.c});
  for (int i = 0; i < steps; ++i) {
    const FlowState k1 = flow_rhs(st);
    const FlowState k2 = flow_rhs(flow_axpy(st, h / 2, k1));
    const FlowState k3 = flow_rhs(flow_axpy(st, h / 2, k2));
    const FlowState k4 = flow_rhs(flow_axpy(st, h, k3));
    st.g.x += (h / 6.0) * (k1.g.x + 2 * k2.g.x + 2 * k3.g.x + k4.g.x);
    st.g.y += (h / 6.0) * (k1.g.y + 2 * k2.g.y + 2 * k3.g.y + k4.g.y);
    st.g.t += (h / 6.0) * (k1.g.t + 2 * k2.g.t + 2 * k3.g.t + k4.g.t);
    st.c.xi += (h / 6.0) * (k1.c.xi + 2 * k2.c.xi + 2 * k3.c.xi + k4.c.xi);
    st.c.eta += (h / 6.0) * (k1.c.eta + 2 * k2.c.eta + 2 * k3.c.eta + k4.c.eta);
    out.push_back({double(i + 1) * h, st.g, st.c});
  }
  return out;
}

double hamiltonian_at_origin(const Covector& cov) {
  return 0.5 * (cov.xi.squaredNorm() + cov.eta.squaredNorm());
}

double liouville_residual(const std::function<Covector(double)>& family,
                          const std::vector<double>& sigmas,
                          const std::vector<double>& times,
                          int flow_steps, double sigma_step) {
  if (times.empty() || sigmas.empty())
    throw InputError("liouville_residual: empty sample lists");
  double s_max = 0.0;
  for (double t : times) s_max = std::max(s_max, t);

  const auto check_level = [&](double sigma) {
    const Covector c = family(sigma);
    if (std::abs(hamiltonian_at_origin(c) - 0.5) > 1e-10)
      throw OffLevelSet("liouville_residual: family leaves H = 1/2");
    return c;
  };

  const auto endpoint = [&](const Covector& c, double time) {
    const int steps = std::max(100, int(std::ceil(flow_steps * time / std::max(s_max, 1e-12))));
    return hamiltonian_flow(time, c, steps).back();
  };

  double worst = 0.0;
  const double h = sigma_step;
  for (double sigma : sigmas) {
    const Covector c0 = check_level(sigma);
    const Covector cp = check_level(sigma + h);
    const Covector cm = check_level(sigma - h);
    for (double time : times) {
      const FlowSample base = endpoint(c0, time);
      const FlowSample plus = endpoint(cp, time);
      const FlowSample minus = endpoint(cm, time);
      const Mat dx = (plus.point.x - minus.point.x) / (2 * h);
      const Vec dy = (plus.point.y - minus.point.y) / (2 * h);
      const Vec dt = (plus.point.t - minus.point.t) / (2 * h);
      const double pairing = (base.cov.xi.array() * dx.array()).sum() +
                             base.cov.eta.dot(dy) + base.cov.tau.dot(dt);
      worst = std::max(worst, std::abs(pairing));
    }
  }
  return worst;
}

}  // namespace rhg::extremal
