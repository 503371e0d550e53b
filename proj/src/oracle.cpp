#include "rhg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rhg/matlin.hpp"

namespace rhg::oracle {

namespace {

double rough_scale(const GroupPoint& target) {
  const double flat = std::sqrt(target.x.squaredNorm() + target.y.squaredNorm());
  return flat + std::sqrt(4.0 * M_PI * target.t.norm());
}

// ---------------------------------------------------------------------------
// Shooting: Levenberg-Marquardt on F(c) = flatten(geodesic(1, c) - target).

Vec shoot_residual(const Vec& c, const GroupPoint& target, const GroupShape& sh) {
  const GroupPoint g = extremal::geodesic(1.0, unflatten_covector(c, sh));
  return flatten(g) - flatten(target);
}

Mat shoot_jacobian(const Vec& c, const GroupPoint& target, const GroupShape& sh) {
  const int n = int(c.size());
  Mat J(n, n);
  const double h0 = 1e-7 * std::max(1.0, c.norm());
  for (int j = 0; j < n; ++j) {
    Vec cp = c, cm = c;
    cp(j) += h0;
    cm(j) -= h0;
    J.col(j) = (shoot_residual(cp, target, sh) - shoot_residual(cm, target, sh)) / (2 * h0);
  }
  return J;
}

struct LmOutcome {
  Vec c;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

LmOutcome lm_shoot(Vec c, const GroupPoint& target, const GroupShape& sh,
                   const OracleConfig& cfg) {
  LmOutcome out;
  Vec F = shoot_residual(c, target, sh);
  double lambda = 1e-3;
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    if (F.norm() <= cfg.endpoint_tol) break;
    const Mat J = shoot_jacobian(c, target, sh);
    const Mat JtJ = J.transpose() * J;
    const Vec g = J.transpose() * F;
    bool stepped = false;
    for (int tries = 0; tries < 25; ++tries) {
      const Mat A = JtJ + lambda * Mat::Identity(JtJ.rows(), JtJ.cols());
      const Vec delta = A.ldlt().solve(-g);
      const Vec c_new = c + delta;
      const Vec F_new = shoot_residual(c_new, target, sh);
      if (F_new.squaredNorm() < F.squaredNorm()) {
        c = c_new;
        F = F_new;
        lambda = std::max(lambda * 0.3, 1e-14);
        stepped = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (!stepped) break;
  }
  out.c = c;
  out.residual = F.norm();
  out.iterations = it;
  out.converged = out.residual <= cfg.endpoint_tol;
  return out;
}

}  // namespace

OracleResult shoot(const GroupPoint& target, const OracleConfig& cfg) {
  if (target.norm() == 0.0) throw OriginPoint("shoot: target must differ from the origin");
  const GroupShape sh = target.shape();
  const int hdim = sh.horizontal_dim();
  const double d0 = rough_scale(target);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double tau_scales[4] = {0.5 * M_PI, M_PI, 2.0 * M_PI, 4.0 * M_PI};

  OracleResult res;
  res.method = OracleMethod::Shoot;
  for (int i = 0; i < cfg.starts; ++i) {
    Vec c(sh.full_dim());
    for (int k = 0; k < hdim; ++k) c(k) = gauss(rng);
    const double hn = c.head(hdim).norm();
    const double amp = d0 * std::exp(0.25 * gauss(rng));
    if (hn > 0) c.head(hdim) *= amp / hn;
    Vec tau(sh.q);
    for (int a = 0; a < sh.q; ++a) tau(a) = gauss(rng);
    const double tn = tau.norm();
    if (tn > 0) tau *= tau_scales[i % 4] / tn;
    c.tail(sh.q) = tau;

    const LmOutcome lm = lm_shoot(c, target, sh, cfg);
    StartLog log;
    log.start_index = i;
    log.converged = lm.converged;
    log.iterations = lm.iterations;
    log.residual = lm.residual;
    log.distance = lm.c.head(hdim).norm();
    log.params = lm.c;
    res.log.push_back(std::move(log));
  }

  // Deterministic merge: smallest distance wins, ties broken by start index.
  for (const StartLog& log : res.log) {
    if (!log.converged) continue;
    if (res.best_start < 0 || log.distance < res.distance) {
      res.best_start = log.start_index;
      res.distance = log.distance;
      res.residual = log.residual;
      res.best_cov = unflatten_covector(log.params, sh);
    }
  }
  if (res.best_start < 0) throw NoConvergence("shoot: no start met endpoint_tol");
  return res;
}

namespace {

// ---------------------------------------------------------------------------
// Direct method: minimize energy of a piecewise-constant control subject to the
// (exact) endpoint constraint, by the augmented Lagrangian in least-squares form.

struct EndpointMap {
  GroupShape sh;
  int n_seg = 0;
  double delta = 0.0;  // segment duration

  int block() const { return sh.horizontal_dim(); }
  int vars() const { return n_seg * block(); }

  HorizontalPair segment(const Vec& U, int i) const {
    const int m = block();
    HorizontalPair w{Mat::Zero(sh.q, sh.p), Vec::Zero(sh.p)};
    int k = i * m;
    for (int c = 0; c < sh.p; ++c)
      for (int r = 0; r < sh.q; ++r) w.xi(r, c) = U(k++);
    for (int j = 0; j < sh.p; ++j) w.eta(j) = U(k++);
    return w;
  }

  // Exact endpoint: x,y accumulate linearly, t accumulates Q(start of segment, w) * delta.
  GroupPoint endpoint(const Vec& U) const {
    GroupPoint g = zero_point(sh);
    for (int i = 0; i < n_seg; ++i) {
      const HorizontalPair w = segment(U, i);
      g.t += delta * group::q_form({g.x, g.y}, w);
      g.x += delta * w.xi;
      g.y += delta * w.eta;
    }
    return g;
  }

  // Jacobian of flatten(endpoint) w.r.t. U; the t rows of block j read
  // delta * Q(P_j - delta * S_j, basis direction) with P_j the partial state and
  // S_j the sum of later segments.
  Mat jacobian(const Vec& U) const {
    const int m = block();
    const int ng = sh.full_dim();
    Mat C = Mat::Zero(ng, vars());

    std::vector<HorizontalPair> w(n_seg);
    for (int i = 0; i < n_seg; ++i) w[i] = segment(U, i);
    std::vector<HorizontalPair> suffix(n_seg + 1,
                                       HorizontalPair{Mat::Zero(sh.q, sh.p), Vec::Zero(sh.p)});
    for (int i = n_seg - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + w[i];

    HorizontalPair P{Mat::Zero(sh.q, sh.p), Vec::Zero(sh.p)};  // (x,y) at segment start
    const int t_row = sh.q * sh.p + sh.p;
    for (int j = 0; j < n_seg; ++j) {
      const Mat bx = P.xi - delta * suffix[j + 1].xi;
      const Vec by = P.eta - delta * suffix[j + 1].eta;
      const int base = j * m;
      for (int c = 0; c < sh.p; ++c) {
        for (int r = 0; r < sh.q; ++r) {
          const int col = base + c * sh.q + r;
          C(c * sh.q + r, col) = delta;                       // x rows
          C(t_row + r, col) = -0.5 * delta * by(c);           // t rows
        }
      }
      for (int c = 0; c < sh.p; ++c) {
        const int col = base + sh.q * sh.p + c;
        C(sh.q * sh.p + c, col) = delta;                      // y rows
        C.block(t_row, col, sh.q, 1) += 0.5 * delta * bx.col(c);
      }
      P = P + delta * w[j];
    }
    return C;
  }
};

struct AlOutcome {
  Vec U;
  double constraint = 0.0;
  int iterations = 0;
  bool converged = false;
};

// One augmented-Lagrangian solve from a given initial control.  With
// feasibility_first the start is pushed onto the endpoint manifold by min-norm
// Gauss-Newton steps before any energy descent: that preserves the winding
// structure of a well-shaped start, which the plain penalty schedule would
// unwind while the constraint is still weak.  Plain random starts must NOT use
// it: their nearest feasible point is a high-energy tangle that the descent
// cannot leave.
AlOutcome solve_al(const EndpointMap& map, const Vec& target_flat, Vec U,
                   const OracleConfig& cfg, bool feasibility_first) {
  const int ng = map.sh.full_dim();
  const double delta = map.delta;
  Vec lambda_bar = Vec::Zero(ng);
  int total_it = 0;

  // Explicit return type: the subtraction must materialize before the temporaries die.
  const auto constraint = [&](const Vec& u) -> Vec { return flatten(map.endpoint(u)) - target_flat; };

  Vec c = constraint(U);
  if (feasibility_first) {
    for (int it = 0; it < 60 && c.norm() > 1e-12 * std::max(1.0, target_flat.norm());
         ++it, ++total_it) {
      const Mat C = map.jacobian(U);
      Mat core = C * C.transpose();
      core.diagonal().array() += 1e-12 * core.trace() + 1e-300;
      const Vec full = -C.transpose() * core.ldlt().solve(c);
      double alpha = 1.0;
      bool ok = false;
      for (int tries = 0; tries < 25; ++tries) {
        const Vec c_new = constraint(U + alpha * full);
        if (c_new.norm() < c.norm()) {
          U += alpha * full;
          c = c_new;
          ok = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!ok) break;
    }
  }
  // Balance the initial penalty against the objective: near a feasible start a
  // weak penalty would trade feasibility back for energy and leave the class.
  double rho = std::min(1e10, std::max(10.0, 2.0 * delta * U.squaredNorm() /
                                                 std::max(1e-12, c.squaredNorm())));
  for (int outer = 0; outer < 40 && total_it < cfg.max_iterations * 10; ++outer) {
    const double w2 = 0.5 * rho;
    double lm = 1e-8;
    bool stationary = false;
    // Inner LM on r = [sqrt(delta) U ; sqrt(w2) (c + lambda/rho)].
    for (int it = 0; it < 80; ++it, ++total_it) {
      const Vec chat = c + lambda_bar / rho;
      const Mat C = map.jacobian(U);
      const Vec g = delta * U + w2 * (C.transpose() * chat);
      if (g.norm() < 1e-10 * std::max(1.0, delta * U.norm())) {
        stationary = true;
        break;
      }
      bool stepped = false;
      for (int tries = 0; tries < 30; ++tries) {
        const double a = delta + lm;
        // Woodbury solve of (a I + w2 C^T C) step = -g.
        const Mat core = a * Mat::Identity(ng, ng) + w2 * (C * C.transpose());
        const Vec cg = C * g;
        const Vec step = -(g - w2 * (C.transpose() * core.ldlt().solve(cg))) / a;
        const Vec U_new = U + step;
        const Vec c_new = constraint(U_new);
        const double f_old = delta * U.squaredNorm() + w2 * chat.squaredNorm();
        const double f_new =
            delta * U_new.squaredNorm() + w2 * (c_new + lambda_bar / rho).squaredNorm();
        if (f_new < f_old) {
          U = U_new;
          c = c_new;
          lm = std::max(lm * 0.25, 1e-12);
          stepped = true;
          break;
        }
        lm *= 8.0;
        if (lm > 1e16) break;
      }
      if (!stepped) {
        // LM cannot improve the subproblem any further at this penalty weight.
        stationary = true;
        break;
      }
    }
    lambda_bar += rho * c;
    // Done only when feasible at a stationary point of the subproblem; feasibility
    // alone is not enough (a refined start enters feasible but far from minimal).
    if (c.norm() <= cfg.endpoint_tol && stationary) break;
    rho = std::min(rho * 8.0, 1e14);
  }

  AlOutcome out;
  out.U = U;
  out.constraint = c.norm();
  out.iterations = total_it;
  out.converged = out.constraint <= cfg.endpoint_tol;
  return out;
}

Vec resample_control(const Vec& U, int n_old, int n_new, int block) {
  Vec out(n_new * block);
  for (int i = 0; i < n_new; ++i) {
    const double mid = (i + 0.5) / double(n_new);
    const int src = std::min(n_old - 1, int(mid * n_old));
    out.segment(i * block, block) = U.segment(src * block, block);
  }
  return out;
}

double control_length(const Vec& U, const EndpointMap& map) {
  double L = 0.0;
  for (int i = 0; i < map.n_seg; ++i) L += map.segment(U, i).norm();
  return L * map.delta;
}

}  // namespace

OracleResult direct_minimize(const GroupPoint& target, const OracleConfig& cfg) {
  if (target.norm() == 0.0)
    throw OriginPoint("direct_minimize: target must differ from the origin");
  const GroupShape sh = target.shape();
  const int block = sh.horizontal_dim();
  const Vec target_flat = flatten(target);
  const double d0 = rough_scale(target);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  OracleResult res;
  res.method = OracleMethod::Direct;
  // Initialization heuristic only (the solve itself sees nothing but the
  // dynamics): a loop must pump area into the part of t that no shear from x
  // can reach, so point some of the seeded loops along that component.
  Vec tperp = matlin::proj_image(target.x, target.t).second;
  const double perp_norm = tperp.norm();
  const bool have_tperp = perp_norm > 1e-9 * std::max(1.0, target.t.norm());
  if (have_tperp) tperp /= perp_norm;
  for (int i = 0; i < cfg.starts; ++i) {
    // Coarse-to-fine continuation: refine by doubling, finishing at exactly
    // cfg.segments.  The base grid must already resolve a full loop well: on a
    // coarse grid the chord penalty of a looped path can exceed the gap to the
    // next winding class, and the refinement would stay loyal to the wrong class.
    int n = std::min(cfg.segments, 48);
    EndpointMap map{sh, n, 1.0 / n};
    Vec U(map.vars());
    const double amp = d0 * 1.2 * std::exp(0.25 * gauss(rng)) / std::sqrt(double(block));
    for (int k = 0; k < U.size(); ++k) U(k) = amp * gauss(rng);
    const bool seeded = i % 2 == 1;
    if (seeded) {
      // The full-loop stationary paths sit in a narrow basin: a plain random
      // start relaxes to a shorter-winding branch almost surely.  Seed half the
      // starts with a well-shaped path in that class: constant drift covering
      // the first layer, plus a loop — x-rate rotating along a vertical
      // direction, y-rate in quadrature — sized by area = amplitude^2 / (4 pi)
      // to pump the unreachable component of t.  Solved feasibility-first so
      // the descent cannot unwind it.
      U *= 0.25;
      for (int j = 0; j < n; ++j) {
        for (int c = 0; c < sh.p; ++c)
          for (int r = 0; r < sh.q; ++r) U(j * block + c * sh.q + r) += target.x(r, c);
        U.segment(j * block + sh.q * sh.p, sh.p) += target.y;
      }
      Vec td(sh.q);
      for (int k = 0; k < sh.q; ++k) td(k) = gauss(rng);
      td.normalize();
      double loop_amp = d0 * 1.2 * std::exp(0.25 * gauss(rng));
      if (have_tperp) {
        if (i % 4 == 1) td = tperp;
        loop_amp = std::sqrt(4.0 * M_PI * perp_norm) * std::exp(0.1 * gauss(rng));
      }
      // Rotating pair: y-rate v(ph) = cos e + sin w, x-rate td * v'(ph)^T, with
      // independent directions e, w — the shape every full-loop stationary
      // control takes, at constant rotating speed |e|^2 + |w|^2.
      Vec e(sh.p), w(sh.p);
      for (int k = 0; k < sh.p; ++k) e(k) = gauss(rng);
      for (int k = 0; k < sh.p; ++k) w(k) = gauss(rng);
      const double sc =
          loop_amp / std::sqrt(std::max(1e-12, e.squaredNorm() + w.squaredNorm()));
      e *= sc;
      w *= sc;
      for (int j = 0; j < n; ++j) {
        const double ph = 2.0 * M_PI * (j + 0.5) / n;
        const Vec vx = std::cos(ph) * w - std::sin(ph) * e;
        for (int c = 0; c < sh.p; ++c)
          for (int r = 0; r < sh.q; ++r) U(j * block + c * sh.q + r) += td(r) * vx(c);
        U.segment(j * block + sh.q * sh.p, sh.p) +=
            std::cos(ph) * e + std::sin(ph) * w;
      }
    }

    AlOutcome sol = solve_al(map, target_flat, U, cfg, seeded);
    int iterations = sol.iterations;
    while (n < cfg.segments) {
      const int n_new = std::min(2 * n, cfg.segments);
      EndpointMap fine{sh, n_new, 1.0 / n_new};
      Vec U_new = resample_control(sol.U, n, n_new, block);
      // The resampled solution is a good path already: restore feasibility
      // before descending so the refinement stays in its winding class.
      sol = solve_al(fine, target_flat, U_new, cfg, true);
      iterations += sol.iterations;
      n = n_new;
      map = fine;
    }

    StartLog log;
    log.start_index = i;
    log.converged = sol.converged;
    log.iterations = iterations;
    log.residual = sol.constraint;
    log.distance = control_length(sol.U, map);
    log.params = sol.U;
    res.log.push_back(std::move(log));
  }

  const EndpointMap map{sh, cfg.segments, 1.0 / cfg.segments};
  for (const StartLog& log : res.log) {
    if (!log.converged) continue;
    if (res.best_start < 0 || log.distance < res.distance) {
      res.best_start = log.start_index;
      res.distance = log.distance;
      res.residual = log.residual;
      res.best_control.segments.clear();
      for (int i = 0; i < cfg.segments; ++i)
        res.best_control.segments.push_back(map.segment(log.params, i));
      res.best_control.duration = 1.0;
    }
  }
  if (res.best_start < 0) throw NoConvergence("direct_minimize: no start converged");

  // Polish: when the target admits a family of minimizers, discretization
  // splits the family into nearby local optima of slightly different lengths
  // separated by tiny barriers.  Re-solving from jittered copies of the best
  // slides along the family to a cheaper member; every accepted candidate is
  // still a feasible path, so this can only tighten the upper bound.
  Vec best_params;
  for (const StartLog& log : res.log)
    if (log.start_index == res.best_start) best_params = log.params;
  for (int k = 0; k < 6; ++k) {
    Vec U = best_params;
    const double jit = 0.03 * d0 * std::exp(0.5 * gauss(rng));
    for (int t = 0; t < U.size(); ++t) U(t) += jit * gauss(rng);
    const AlOutcome sol = solve_al(map, target_flat, U, cfg, true);
    if (!sol.converged) continue;
    const double L = control_length(sol.U, map);
    if (L < res.distance) {
      res.distance = L;
      res.residual = sol.constraint;
      for (int i = 0; i < cfg.segments; ++i)
        res.best_control.segments[i] = map.segment(sol.U, i);
      best_params = sol.U;
    }
  }
  return res;
}

BoundCheckReport lower_bound_check(const Covector& cov, const std::vector<double>& times,
                                   const OracleConfig& cfg, double tol_abs) {
  const double tcut = extremal::cut_time(cov);
  if (!std::isfinite(tcut)) throw InfiniteCutTime("lower_bound_check: cut time infinite");
  BoundCheckReport rep;
  const double speed = cov.horizontal_norm();
  for (double s : times) {
    if (!(s > 0.0) || !(s < tcut))
      throw InputError("lower_bound_check: times must lie strictly inside (0, cut time)");
    const GroupPoint target = extremal::geodesic(s, cov);
    const OracleResult sh = shoot(target, cfg);
    const OracleResult di = direct_minimize(target, cfg);
    BoundCheckRow row;
    row.s = s;
    row.claimed = s * speed;
    row.shoot_distance = sh.distance;
    row.direct_distance = di.distance;
    row.margin = std::min(sh.distance, di.distance) - row.claimed;
    row.violation = row.margin < -tol_abs;
    rep.any_violation = rep.any_violation || row.violation;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace rhg::oracle
