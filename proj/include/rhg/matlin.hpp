#pragma once

#include "rhg/types.hpp"

namespace rhg::matlin {

// Relative singular-value cutoff for all rank decisions.
inline constexpr double kDefaultSvTol = 1e-10;

// P_tau = tau tau^T / |tau|^2.  Throws ZeroTau on |tau| = 0.
Mat proj_tau(const Vec& tau);

// I - P_tau.
Mat proj_tau_perp(const Vec& tau);

// Moore-Penrose inverse via SVD; singular values below sv_tol * sigma_max count as zero.
Mat pinv(const Mat& x, double sv_tol = kDefaultSvTol);

// (P_{Im x} t, P_{Im x}^perp t).
std::pair<Vec, Vec> proj_image(const Mat& x, const Vec& t, double sv_tol = kDefaultSvTol);

// Numerical rank of x under the same cutoff.
int image_rank(const Mat& x, double sv_tol = kDefaultSvTol);

// Orthonormal basis of ker x (right singular vectors of negligible singular values).
Mat kernel_basis(const Mat& x, double sv_tol = kDefaultSvTol);

// A_tau(xi, eta) = (tau eta^T, -xi^T tau).
HorizontalPair apply_A(const Vec& tau, const HorizontalPair& pair);

// e^{-s A_tau}(xi, eta) by the three-term closed form; exact identity branch at tau = 0,
// series evaluation of the trigonometric coefficients when |tau| s is tiny.
HorizontalPair exp_A(double s, const Vec& tau, const HorizontalPair& pair);

}  // namespace rhg::matlin
