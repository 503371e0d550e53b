#include "rhg/cutlocus.hpp"

#include <cmath>

namespace rhg::cutlocus {

namespace {

struct Decomposition {
  Vec proj;       // P_{Im x} t
  Vec perp;       // P_{Im x}^perp t
  Vec xdt;        // x^+ t
  double excess;  // |P^perp t| - pi |x^+ t|^2
  double atol_eff;
  int x_rank = 0;
};

Decomposition decompose(const Mat& x, const Vec& t, double sv_tol, double atol) {
  Decomposition d;
  d.atol_eff = atol * std::max(1.0, t.norm());
  if (x.norm() <= d.atol_eff) {
    // x is zero at the scale of the point (e.g. pure roundoff residue of a
    // projection); judging its rank against its own largest singular value
    // would turn that residue into a full image and send x^+ t to infinity.
    d.proj = Vec::Zero(t.size());
    d.perp = t;
    d.xdt = Vec::Zero(x.cols());
    d.excess = t.norm();
    return d;
  }
  std::tie(d.proj, d.perp) = matlin::proj_image(x, t, sv_tol);
  d.xdt = matlin::pinv(x, sv_tol) * t;
  d.excess = d.perp.norm() - M_PI * d.xdt.squaredNorm();
  d.x_rank = matlin::image_rank(x, sv_tol);
  return d;
}

}  // namespace

CutClassification classify(const GroupPoint& g, double sv_tol, double atol) {
  if (g.norm() == 0.0) throw OriginPoint("classify: the origin is not classified");
  const GroupShape sh = g.shape();
  CutClassification out;
  const Decomposition d = decompose(g.x, g.t, sv_tol, atol);
  if (g.y.norm() > d.atol_eff) return out;            // y != 0
  if (d.perp.norm() <= d.atol_eff) return out;        // t in Im x
  if (d.excess < -d.atol_eff) return out;             // strict inequality fails

  out.verdict = Verdict::Cut;
  out.distance = std::sqrt(g.x.squaredNorm() + 4.0 * M_PI * d.perp.norm());
  out.multiplicity =
      std::abs(d.excess) <= d.atol_eff ? Multiplicity::Unique : Multiplicity::Multiple;
  if (sh.p >= 2) {
    out.conjugate = ConjugateFlag::Yes;
  } else {
    const double watts = g.x.norm() * d.excess;
    if (std::abs(watts) <= d.atol_eff)
      out.conjugate = ConjugateFlag::Yes;
    else if (std::abs(watts) <= 10.0 * d.atol_eff)
      out.conjugate = ConjugateFlag::Undecided;
    else
      out.conjugate = ConjugateFlag::No;
  }
  return out;
}

double cut_distance(const Mat& x, const Vec& t, double sv_tol, double atol) {
  const GroupPoint g{x, Vec::Zero(x.cols()), t};
  const CutClassification cls = classify(g, sv_tol, atol);
  if (!cls.is_cut()) throw NotACutPoint("cut_distance: point is not a cut point");
  return cls.distance;
}

Covector RecoveredFamily::canonical() const {
  Vec eta = Vec::Zero(shape.p);
  eta(0) = rho / std::sqrt(M_PI);
  return {xi_base, eta, tau};
}

Covector RecoveredFamily::member(const Vec& mu, const Vec& eta) const {
  if (mu.size() != shape.p || eta.size() != shape.p)
    throw ShapeMismatch("RecoveredFamily::member: parameter sizes");
  const double budget = M_PI * (eta.squaredNorm() + mu.squaredNorm());
  if (std::abs(budget - rho * rho) > 1e-6 * std::max(1.0, rho * rho))
    throw InputError("RecoveredFamily::member: pi(|eta|^2+|mu|^2) != rho^2");
  return {xi_base - tau * mu.transpose(), eta, tau};
}

RecoveredFamily recover_covectors(const Mat& x, const Vec& t, double sv_tol, double atol) {
  const GroupPoint g{x, Vec::Zero(x.cols()), t};
  const CutClassification cls = classify(g, sv_tol, atol);
  if (!cls.is_cut()) throw NotACutPoint("recover_covectors: point is not a cut point");

  const Decomposition d = decompose(x, t, sv_tol, atol);
  RecoveredFamily fam;
  fam.shape = g.shape();
  fam.tau = d.perp / d.perp.norm();
  fam.lambda_base = d.xdt;
  // xi = -tau lambda^T + x/(2 pi) with lambda = x^+ t, so that lambda = -xi^T tau
  // solves x lambda = P_{Im x} t and the round trip through the extremal is exact.
  fam.xi_base = -fam.tau * d.xdt.transpose() + x / (2.0 * M_PI);
  fam.rho = std::sqrt(std::max(0.0, d.excess));
  fam.kernel_dim = fam.shape.p - d.x_rank;
  return fam;
}

Multiplicity multiplicity_from_covector(const Covector& cov, double sv_tol, double atol) {
  if (!std::isfinite(extremal::cut_time(cov)))
    throw InfiniteCutTime("multiplicity_from_covector: cut time is infinite");
  const double hn = cov.horizontal_norm();
  const Covector c{cov.xi / hn, cov.eta / hn, cov.tau / hn};  // normalize scale
  if (c.eta.norm() > atol) return Multiplicity::Multiple;
  const double tn = c.tau.norm();
  const Vec alpha = c.xi.transpose() * c.tau;  // xi^T tau, nonzero here
  const Mat v = c.xi - c.tau * (alpha.transpose() / (tn * tn));  // P_tau^perp xi
  const Mat K = matlin::kernel_basis(v, sv_tol);
  if (K.cols() == 0) return Multiplicity::Unique;
  const double overlap = (K.transpose() * alpha).norm();
  return overlap > atol * alpha.norm() ? Multiplicity::Multiple : Multiplicity::Unique;
}

GroupPoint density_witness(const Mat& x, const Vec& t, double eps, double sv_tol,
                           double atol) {
  const GroupPoint g{x, Vec::Zero(x.cols()), t};
  const CutClassification cls = classify(g, sv_tol, atol);
  const Decomposition d = decompose(x, t, sv_tol, atol);
  if (!cls.is_cut() || cls.multiplicity != Multiplicity::Unique || d.perp.norm() == 0.0)
    throw NotUniqueCutPoint("density_witness: need a Unique cut point with P^perp t != 0");
  if (!(eps > 0.0)) throw InputError("density_witness: eps must be positive");
  return {x, Vec::Zero(x.cols()), d.proj + (1.0 + eps) * d.perp};
}

double sigma_psi(const Vec& x, const Vec& t) {
  const double xn2 = x.squaredNorm();
  if (xn2 == 0.0) throw ZeroX("sigma_psi: x = 0");
  if (t.squaredNorm() == 0.0) throw ZeroT("sigma_psi: t = 0");
  const double w = x.dot(t);
  const double xn4 = xn2 * xn2;
  const double xn8 = xn4 * xn4;
  return t.squaredNorm() - w * w / xn2 - M_PI * M_PI * w * w * w * w / xn8;
}

SigmaGradients sigma_gradients(const Vec& x, const Vec& t) {
  const double xn2 = x.squaredNorm();
  if (xn2 == 0.0) throw ZeroX("sigma_gradients: x = 0");
  if (t.squaredNorm() == 0.0) throw ZeroT("sigma_gradients: t = 0");
  const double w = x.dot(t);
  const double pi2 = M_PI * M_PI;
  const double xn6 = xn2 * xn2 * xn2;
  // grad_t = a t + b x, grad_x = b t + c x.
  const double a = 2.0;
  const double b = -(2.0 / xn2) * w * (1.0 + 2.0 * pi2 * w * w / xn6);
  const double c = (2.0 / (xn2 * xn2)) * w * w * (1.0 + 4.0 * pi2 * w * w / xn6);
  SigmaGradients out;
  out.grad_t = a * t + b * x;
  out.grad_x = b * t + c * x;
  // Evaluates to -16 pi^4 <x,t>^6 / |x|^16 in exact arithmetic.
  out.discriminant = a * c - b * b;
  return out;
}

}  // namespace rhg::cutlocus
