#ifndef SUBFRAC_RIESZ_HPP
#define SUBFRAC_RIESZ_HPP

#include "subfrac/carnot.hpp"
#include "subfrac/heat.hpp"

namespace subfrac {

/// Time-integral quadrature controls. Integrals run in s = log t with the
/// split pinned at t ~ gauge(p)^2 where the integrand peaks; t_min/t_max
/// override the automatic range when nonzero (the composition route at the
/// marginal order beta = Q relies on a finite t_max).
struct QuadratureScheme {
  enum class Subst { log_t, split_at_rho2 };
  Subst subst = Subst::split_at_rho2;
  int nodes = 512;
  double t_min = 0.0;
  double t_max = 0.0;
};

/// Heat-kernel time integrals: the Riesz kernels R_beta, the positive
/// kernels Rtilde_{-alpha}, the kernel-derived homogeneous norm rho and the
/// Poisson kernel P(., y) of the degenerate extension equation.
class KernelEvaluator {
 public:
  explicit KernelEvaluator(const GroupSpec& g, QuadratureScheme quad = {});

  const GroupSpec& group() const { return g_; }
  const HeatKernel& heat() const { return heat_; }
  const QuadratureScheme& quadrature() const { return quad_; }

  /// R_beta(p) = Gamma(beta/2)^{-1} int_0^inf t^{beta/2-1} h(t,p) dt,
  /// 0 < beta < Q, p != e. Positive, homogeneous of degree beta - Q.
  double riesz(double beta, const Vec& p) const;

  /// Same integral without the order restriction; used internally by the
  /// composition route where a finite t_max regularizes beta = Q.
  double riesz_raw(double beta, const Vec& p) const;

  /// Rtilde_{-alpha}(p) = (-alpha/2)/Gamma(-alpha/2) int t^{-alpha/2-1} h dt
  /// for alpha in (0,2). The prefactor is positive (Gamma of a negative
  /// argument); a positivity audit rejects sign slips.
  double riesz_tilde(double alpha, const Vec& p) const;

  /// rho(p) = R_{2-alpha}(p)^{1/(2-alpha-Q)}, extended by rho(e) = 0.
  double rho(double alpha, const Vec& p) const;

  /// P(p, y) = C_a y^{1-a} int_0^inf t^{(a-3)/2} e^{-y^2/4t} h(t,p) dt.
  double poisson(double a, const Vec& p, double y) const;

 private:
  GroupSpec g_;
  QuadratureScheme quad_;
  HeatKernel heat_;
};

/// v(., y) = u * P(., y): discrete group convolution with the Poisson
/// kernel, memoized per group offset (group-compatible lattice required for
/// step-2 groups). Monotone in u since the kernel is nonnegative.
GridFunction poisson_convolve(const KernelEvaluator& ke, double a, const GridFunction& u, double y);

/// Average of R_beta over the lattice cell centered at the origin. R_beta is
/// locally integrable (a type-beta kernel scales like gauge^{beta-Q});
/// dyadic subdivision resolves the singular cell, with a geometric
/// extrapolation of the innermost remainder.
double riesz_cell_average(const KernelEvaluator& ke, double beta, const Lattice& lat);

/// Spec-facing descriptor: one kernel family with its parameter.
struct KernelDescriptor {
  enum class Family { riesz, rtilde, poisson };
  Family family = Family::riesz;
  double param = 1.0;  // beta | alpha | a
  GroupSpec group;
  QuadratureScheme quadrature;

  /// Kernel value; y is used by the poisson family only.
  double eval(const Vec& p, double y = 1.0) const;
};

}  // namespace subfrac

#endif
