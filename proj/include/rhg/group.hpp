#pragma once

#include <vector>

#include "rhg/types.hpp"

namespace rhg::group {

// Q((x,y),(xi,eta)) = (x eta - xi y)/2; the vertical part of the group law.
Vec q_form(const HorizontalPair& a, const HorizontalPair& b);

GroupPoint identity(const GroupShape& shape);
GroupPoint mul(const GroupPoint& g, const GroupPoint& h);
GroupPoint inverse(const GroupPoint& g);

// Carnot dilation (r x, r y, r^2 t), r > 0.
GroupPoint dilate(double r, const GroupPoint& g);

// Left-invariant horizontal frame at g: X_{ak} = (e_a e_k^T, 0, -y_k e_a / 2) in
// column-major (a,k) order, then Y_j = (0, e_j, x_j / 2).  Tangent vectors are
// returned as GroupPoint-shaped coordinate triples.
std::vector<GroupPoint> frame(const GroupPoint& g);

struct PiecewiseControl {
  std::vector<HorizontalPair> segments;  // constant control per segment
  double duration = 1.0;                 // total time, split evenly

  double length() const {
    double L = 0.0;
    for (const auto& s : segments) L += s.norm();
    return L * duration / double(segments.size());
  }
};

// RK4 integration of (x,y)' = (u,v), t' = Q((x,y),(u,v)) from `start`.
// Returns the sampled trajectory including both endpoints.
std::vector<GroupPoint> integrate_control(const GroupPoint& start,
                                          const PiecewiseControl& ctrl,
                                          int steps_per_segment = 64);
std::vector<GroupPoint> integrate_control(const PiecewiseControl& ctrl,
                                          int steps_per_segment = 64);

}  // namespace rhg::group
