#ifndef SUBFRAC_VERIFY_HPP
#define SUBFRAC_VERIFY_HPP

#include <string>
#include <vector>

#include "subfrac/carnot.hpp"
#include "subfrac/riesz.hpp"

namespace subfrac {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

/// Relative L1 defect of R_a * R_b = R_{a+b} over targets in the gauge shell
/// [shell_lo, shell_hi]. Both factors are sampled on the lattice with
/// subcell averaging near their singular cells; the mass escaping the box is
/// restored by a power-law tail fitted on the outer shell.
double riesz_convolution_defect(const GroupSpec& g, const Lattice& lat, double a, double b,
                                double shell_lo, double shell_hi);

/// max over the shell of |L_h R_beta + (2/alpha) Rtilde_{-alpha}| relative to
/// |(2/alpha) Rtilde| with beta = 2 - alpha (the paper's kernel identity up
/// to the analytically derived -(2/alpha) prefactor of its Rtilde
/// convention).
double riesz_laplacian_identity_defect(const GroupSpec& g, const Lattice& lat, double alpha,
                                       double shell_lo, double shell_hi);

/// Fundamental-solution checks for R_2: returns (max shell residual relative
/// to |R_2|/gauge^2, max flux drift of F(r) over the radii list, F(r_0)).
struct FundamentalSolutionReport {
  double shell_residual = 0.0;
  double flux_drift = 0.0;
  double charge = 0.0;
};
FundamentalSolutionReport riesz_fundamental_solution(const GroupSpec& g, const Lattice& lat,
                                                     double shell_lo, double shell_hi,
                                                     const std::vector<double>& flux_radii);

/// Total mass of P(., y): quadrature over the (r, z) cylindrical reduction
/// inside gauge <= R plus a measured power-law tail beyond R (the kernel
/// decays like gauge^{a-1-Q}, too heavy for any finite box alone).
/// heisenberg1 only.
double poisson_mass_h1(double a, double y, double R, double dr, double dz);

}  // namespace subfrac

#endif
