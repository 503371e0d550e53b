#pragma once

#include <vector>

#include "rhg/cutlocus.hpp"
#include "rhg/extremal.hpp"
#include "rhg/types.hpp"

namespace rhg::conjugate {

// Determinant thresholds of the numeric test (columns normalized first).
inline constexpr double kDetTol = 1e-6;
inline constexpr double kUndecidedBand = 1e-4;
inline constexpr double kDefaultFdStep = 5e-5;  // Richardson pair {2h, h} = {1e-4, 5e-5}

enum class Verdict { Conjugate, NotConjugate, Undecided };
enum class Method { Determinant, ClosedFormP1, AbnormalTrivial };

struct ConjugateReport {
  double time_tested = 0.0;
  double determinant_value = 0.0;
  Verdict verdict = Verdict::Undecided;
  Method method = Method::Determinant;
};

// Orthonormal tangent frame of the cylinder {|xi'|^2 + |eta'|^2 = const} at `base`:
// qp + p - 1 directions orthogonal to the radial (xi,eta) direction plus q pure
// tau directions.
struct CylinderFrame {
  Covector base;
  std::vector<Covector> directions;
};

CylinderFrame cylinder_frame(const Covector& cov);

// Singular-differential test of the time-s endpoint map on the cylinder: central
// finite differences with Richardson extrapolation, determinant of the
// column-normalized (qp+p+q) x (qp+p+q) matrix [d_s gamma, d_frame gamma].
ConjugateReport numeric_conjugate_test(double s, const Covector& cov,
                                       double fd_step = kDefaultFdStep);

// p = 1 closed form: the cut time 2 pi/|tau| is conjugate iff eta * P_tau^perp xi = 0.
bool p1_criterion(const Covector& cov, double atol = 1e-9);

// Wraps p1_criterion into a report at the cut time.
ConjugateReport closed_form_report(const Covector& cov, double atol = 1e-9);

// The (2q-1) x (2q-1) kernel matrix from the p = 1 necessary-condition proof;
// trivial kernel (smallest singular value > 0) rules out conjugacy at the cut time.
Mat build_mhat(const Covector& cov);

// Conjugacy of the cut point (x, 0, t) itself: always true for p >= 2; for p = 1
// true iff |x| (|P_{Im x}^perp t| - pi |x^+ t|^2) = 0 within atol.
bool cutpoint_conjugate(const Mat& x, const Vec& t, const GroupShape& shape,
                        double sv_tol = matlin::kDefaultSvTol,
                        double atol = cutlocus::kAtol);

}  // namespace rhg::conjugate
