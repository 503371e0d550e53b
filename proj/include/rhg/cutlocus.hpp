#pragma once

#include "rhg/extremal.hpp"
#include "rhg/matlin.hpp"
#include "rhg/types.hpp"

namespace rhg::cutlocus {

// Absolute tolerance of the equality tests (scaled by max(1, |t|)).
inline constexpr double kAtol = 1e-9;

enum class Verdict { NotCut, Cut };
enum class Multiplicity { Unique, Multiple };
enum class ConjugateFlag { Yes, No, Undecided };

struct CutClassification {
  Verdict verdict = Verdict::NotCut;
  Multiplicity multiplicity = Multiplicity::Unique;  // meaningful only when Cut
  ConjugateFlag conjugate = ConjugateFlag::No;       // meaningful only when Cut
  double distance = 0.0;                             // present iff Cut

  bool is_cut() const { return verdict == Verdict::Cut; }
};

// Membership test for the cut locus of the origin:
// y = 0, t not in Im x, |P_{Im x}^perp t| >= pi |x^+ t|^2, with distance
// sqrt(|x|^2 + 4 pi |P^perp t|) when it holds.
CutClassification classify(const GroupPoint& g,
                           double sv_tol = matlin::kDefaultSvTol,
                           double atol = kAtol);

// Distance to a cut point (x, 0, t); throws NotACutPoint otherwise.
double cut_distance(const Mat& x, const Vec& t,
                    double sv_tol = matlin::kDefaultSvTol,
                    double atol = kAtol);

// All covectors whose extremal reaches the cut point (x, 0, t) at its cut time,
// parametrized as xi = xi_base - tau (mu)^T over mu in ker x together with eta
// of norm pi(|eta|^2 + |mu|^2) = rho^2 (and its O(p) orbit).
struct RecoveredFamily {
  GroupShape shape;
  Vec tau;          // unit
  Mat xi_base;      // q x p
  Vec lambda_base;  // x^+ t
  double rho = 0.0; // family radius
  int kernel_dim = 0;

  // Deterministic representative: mu = 0, eta = (rho/sqrt(pi)) e_1.
  Covector canonical() const;
  // Family member for explicit (mu, eta); mu must lie in ker x and
  // pi(|eta|^2 + |mu|^2) must equal rho^2 (validated to a loose tolerance).
  Covector member(const Vec& mu, const Vec& eta) const;
};

RecoveredFamily recover_covectors(const Mat& x, const Vec& t,
                                  double sv_tol = matlin::kDefaultSvTol,
                                  double atol = kAtol);

// Minimizer multiplicity read off the covector itself.
Multiplicity multiplicity_from_covector(const Covector& cov,
                                        double sv_tol = matlin::kDefaultSvTol,
                                        double atol = kAtol);

// Nearby Multiple cut point witnessing density of multiple-minimizer points.
GroupPoint density_witness(const Mat& x, const Vec& t, double eps,
                           double sv_tol = matlin::kDefaultSvTol,
                           double atol = kAtol);

// p = 1 equality stratum: psi(x,t) = |t|^2 - <x,t>^2/|x|^2 - pi^2 <x,t>^4 / |x|^8.
double sigma_psi(const Vec& x, const Vec& t);

struct SigmaGradients {
  Vec grad_x;
  Vec grad_t;
  double discriminant;  // ac - b^2 of grad_t = a t + b x, grad_x = b t + c x
};

SigmaGradients sigma_gradients(const Vec& x, const Vec& t);

}  // namespace rhg::cutlocus
