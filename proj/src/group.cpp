#include "rhg/group.hpp"

namespace rhg::group {

Vec q_form(const HorizontalPair& a, const HorizontalPair& b) {
  if (a.xi.rows() != b.xi.rows() || a.xi.cols() != b.xi.cols())
    throw ShapeMismatch("q_form: shapes differ");
  return 0.5 * (a.xi * b.eta - b.xi * a.eta);
}

GroupPoint identity(const GroupShape& shape) { return zero_point(shape); }

GroupPoint mul(const GroupPoint& g, const GroupPoint& h) {
  check_shape(g.shape(), h.shape(), "mul");
  return {g.x + h.x, g.y + h.y,
          g.t + h.t + q_form({g.x, g.y}, {h.x, h.y})};
}

GroupPoint inverse(const GroupPoint& g) { return {-g.x, -g.y, -g.t}; }

GroupPoint dilate(double r, const GroupPoint& g) {
  if (!(r > 0.0)) throw NonpositiveR("dilate: r must be positive");
  return {r * g.x, r * g.y, r * r * g.t};
}

std::vector<GroupPoint> frame(const GroupPoint& g) {
  const GroupShape s = g.shape();
  std::vector<GroupPoint> out;
  out.reserve(s.horizontal_dim());
  for (int k = 0; k < s.p; ++k) {
    for (int a = 0; a < s.q; ++a) {
      GroupPoint X = zero_point(s);
      X.x(a, k) = 1.0;
      X.t(a) = -0.5 * g.y(k);
      out.push_back(std::move(X));
    }
  }
  for (int j = 0; j < s.p; ++j) {
    GroupPoint Y = zero_point(s);
    Y.y(j) = 1.0;
    Y.t = 0.5 * g.x.col(j);
    out.push_back(std::move(Y));
  }
  return out;
}

namespace {

// State derivative for a constant control w: (x,y)' = w, t' = Q((x,y), w).
struct Deriv {
  Mat dx;
  Vec dy;
  Vec dt;
};

Deriv rhs(const GroupPoint& g, const HorizontalPair& w) {
  return {w.xi, w.eta, q_form({g.x, g.y}, w)};
}

GroupPoint advance(const GroupPoint& g, const Deriv& d, double h) {
  return {g.x + h * d.dx, g.y + h * d.dy, g.t + h * d.dt};
}

}  // namespace

std::vector<GroupPoint> integrate_control(const GroupPoint& start,
                                          const PiecewiseControl& ctrl,
                                          int steps_per_segment) {
  if (steps_per_segment < 1) throw InputError("integrate_control: steps_per_segment >= 1");
  if (ctrl.segments.empty()) throw InputError("integrate_control: empty control");
  const double h = ctrl.duration / double(ctrl.segments.size()) / double(steps_per_segment);
  std::vector<GroupPoint> out;
  out.reserve(ctrl.segments.size() * steps_per_segment + 1);
  GroupPoint g = start;
  out.push_back(g);
  for (const auto& w : ctrl.segments) {
    check_shape(GroupShape{int(w.xi.rows()), int(w.xi.cols())}, start.shape(),
                "integrate_control");
    for (int i = 0; i < steps_per_segment; ++i) {
      const Deriv k1 = rhs(g, w);
      const Deriv k2 = rhs(advance(g, k1, h / 2), w);
      const Deriv k3 = rhs(advance(g, k2, h / 2), w);
      const Deriv k4 = rhs(advance(g, k3, h), w);
      g.x += (h / 6.0) * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
      g.y += (h / 6.0) * (k1.dy + 2 * k2.dy + 2 * k3.dy + k4.dy);
      g.t += (h / 6.0) * (k1.dt + 2 * k2.dt + 2 * k3.dt + k4.dt);
      out.push_back(g);
    }
  }
  return out;
}

std::vector<GroupPoint> integrate_control(const PiecewiseControl& ctrl,
                                          int steps_per_segment) {
  if (ctrl.segments.empty()) throw InputError("integrate_control: empty control");
  const GroupShape s{int(ctrl.segments[0].xi.rows()), int(ctrl.segments[0].xi.cols())};
  return integrate_control(identity(s), ctrl, steps_per_segment);
}

}  // namespace rhg::group
