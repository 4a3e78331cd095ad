#ifndef SUBFRAC_HEAT_HPP
#define SUBFRAC_HEAT_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "subfrac/carnot.hpp"

namespace subfrac {

/// Analytic heat kernel h(t, x) of d_t + L, h(0,.) = delta_e.
///  - euclidean(n): (4 pi t)^{-n/2} exp(-|x|^2/4t)
///  - heisenberg1:  partial Fourier transform in the vertical variable plus
///    the Mehler kernel of the resulting magnetic oscillator,
///      h(t,(x,y,z)) = pi^{-2} int_0^inf (l/sinh 4lt)
///                     exp(-l coth(4lt) (x^2+y^2)) cos(l z) dl.
///    The formula is treated as a hypothesis: its normalization is pinned by
///    unit mass, the Q = 4 scaling law and Monte Carlo agreement (tests).
///  - product(base): factorizes as h_base * 1-d Gaussian on the extra
///    coordinate.
class HeatKernel {
 public:
  explicit HeatKernel(const GroupSpec& g);

  const GroupSpec& group() const { return g_; }
  double eval(double t, const Vec& p) const;

  /// Same value through a precomputed (r, |z|) interpolation table of the
  /// t = 1 kernel (heisenberg1 only; other kinds fall through to eval).
  /// Intended for time-integral kernels that need h at hundreds of t per
  /// point; relative accuracy ~1e-4 where the kernel is not negligible.
  double eval_fast(double t, const Vec& p) const;
  void ensure_table() const;

 private:
  double h1_direct(double t, double r2, double z) const;

  GroupSpec g_;
  std::unique_ptr<HeatKernel> base_;  // product factor
  struct Table;
  mutable std::shared_ptr<const Table> table_;
};

/// Discrete group convolution (u * h(t,.))(x) = sum_y u(y) h(t, y^{-1} x) vol.
/// Kernel values are memoized per group offset; for groups of step 2 the
/// lattice must be group-compatible so offsets are lattice-exact.
GridFunction heat_convolve(const HeatKernel& hk, double t, const GridFunction& u);

struct McConfig {
  std::uint64_t seed = 1;
  int paths = 10000;
  int min_steps = 50;
  double steps_per_unit_time = 200.0;
};

struct McResult {
  Vec density;     // per requested cell
  Vec stderr_;     // binomial standard error per cell
  double mass = 0;           // fraction of paths inside the whole lattice box
  double mass_stderr = 0;
  Vec coord_mean;  // per-axis endpoint moments (diagnostics)
  Vec coord_var;
};

/// Kernel-density oracle: Euler-Maruyama with Stratonovich midpoint stepping
/// of dX = sum_j X_j(X) o dW_j, run to time 2t so the generator matches
/// -L = sum_j X_j^2 (not half of it). Cell densities are path fractions per
/// cell volume; per-path generator streams derive from the seed.
McResult mc_estimate(const GroupSpec& g, double t, const Lattice& lat,
                     const std::vector<IVec>& cells, const McConfig& cfg);

/// Spec-shaped provider facade.
struct HeatProvider {
  enum class Kind { abelian, heisenberg1_integral, monte_carlo };
  Kind kind;
  GroupSpec group;
  McConfig mc;
  double mc_cell_width = 0.5;

  static HeatProvider analytic(const GroupSpec& g);
  static HeatProvider monte_carlo(const GroupSpec& g, const McConfig& cfg, double cell_width);
};

double heat_eval(const HeatProvider& prov, double t, const Vec& p, double* stderr_out = nullptr);

}  // namespace subfrac

#endif
