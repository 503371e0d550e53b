#pragma once

#include <cstdint>
#include <vector>

#include "rhg/extremal.hpp"
#include "rhg/group.hpp"
#include "rhg/types.hpp"

namespace rhg::oracle {

struct OracleConfig {
  std::uint64_t seed = 0;
  int starts = 16;
  int max_iterations = 200;
  double endpoint_tol = 1e-9;
  int segments = 16;  // direct method resolution
};

struct StartLog {
  int start_index = 0;
  bool converged = false;
  int iterations = 0;
  double distance = 0.0;
  double residual = 0.0;
  Vec params;  // flattened covector (shoot) or control (direct) at the final iterate
};

enum class OracleMethod { Shoot, Direct };

struct OracleResult {
  OracleMethod method = OracleMethod::Shoot;
  double distance = 0.0;
  double residual = 0.0;
  Covector best_cov;                   // shoot
  group::PiecewiseControl best_control;  // direct
  int best_start = -1;
  std::vector<StartLog> log;
};

// Upper bound on d(0, target) by damped least-squares inversion of the time-1
// extremal endpoint map over un-normalized covectors, seeded multistart.
OracleResult shoot(const GroupPoint& target, const OracleConfig& cfg);

// Upper bound by augmented-Lagrangian energy minimization over piecewise-constant
// controls with cfg.segments segments (coarse-to-fine continuation per start).
OracleResult direct_minimize(const GroupPoint& target, const OracleConfig& cfg);

struct BoundCheckRow {
  double s = 0.0;
  double claimed = 0.0;         // s |(xi,eta)|
  double shoot_distance = 0.0;
  double direct_distance = 0.0;
  double margin = 0.0;          // min(oracles) - claimed
  bool violation = false;
};

struct BoundCheckReport {
  std::vector<BoundCheckRow> rows;
  bool any_violation = false;
};

// Verifies no oracle finds a competitor shorter than s |(xi,eta)| - tol_abs at
// targets geodesic(s, cov) for each s strictly below the cut time.
BoundCheckReport lower_bound_check(const Covector& cov, const std::vector<double>& times,
                                   const OracleConfig& cfg, double tol_abs = 1e-3);

}  // namespace rhg::oracle
