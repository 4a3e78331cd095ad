#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "subfrac/carnot.hpp"
#include "subfrac/riesz.hpp"
#include "subfrac/special.hpp"
#include "subfrac/verify.hpp"

using namespace subfrac;

namespace {

constexpr double kPi = 3.14159265358979323846;

Lattice h1_lattice(double h, int ext, int extz) {
  Vec sp(3);
  sp << h, h, 2 * h * h;
  IVec e(3);
  e << ext, ext, extz;
  return Lattice(sp, e);
}

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("riesz: euclidean(3) recovers the Newtonian kernel 1/(4 pi |x|)") {
  auto e3 = GroupSpec::euclidean(3);
  KernelEvaluator ke(e3);
  CHECK(ke.riesz(2.0, v3(1, 0, 0)) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(2e-3));
  CHECK(ke.riesz(2.0, v3(0, 0.6, 0.8)) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(2e-3));
  CHECK(ke.riesz(2.0, v3(0, 0, 2.5)) == doctest::Approx(1.0 / (4.0 * kPi * 2.5)).epsilon(2e-3));
  CHECK_THROWS(ke.riesz(2.0, Vec::Zero(3)));
  CHECK_THROWS(ke.riesz(0.0, v3(1, 0, 0)));
  CHECK_THROWS(ke.riesz(3.0, v3(1, 0, 0)));
}

TEST_CASE("riesz: homogeneity degree beta - Q and semicheck symmetry on h1") {
  auto h1 = GroupSpec::heisenberg1();
  KernelEvaluator ke(h1);
  const double beta = 1.2;
  Vec p = v3(0.7, -0.4, 0.5);
  const double ratio = ke.riesz(beta, dilate(h1, 2.0, p)) / ke.riesz(beta, p);
  CHECK(ratio == doctest::Approx(std::pow(2.0, beta - 4.0)).epsilon(5e-3));
  CHECK(ke.riesz(beta, semicheck(h1, p)) == doctest::Approx(ke.riesz(beta, p)).epsilon(1e-12));
}

TEST_CASE("riesz_tilde: classical 1-d fractional kernel constant") {
  auto e1 = GroupSpec::euclidean(1);
  KernelEvaluator ke(e1);
  // Rtilde_{-1}(x) = 1/(2 pi x^2)
  CHECK(ke.riesz_tilde(1.0, Vec::Constant(1, 1.0)) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(3e-3));
  CHECK(ke.riesz_tilde(1.0, Vec::Constant(1, 2.0)) == doctest::Approx(1.0 / (8.0 * kPi)).epsilon(3e-3));
  CHECK_THROWS(ke.riesz_tilde(0.0, Vec::Constant(1, 1.0)));
  CHECK_THROWS(ke.riesz_tilde(2.0, Vec::Constant(1, 1.0)));
}

TEST_CASE("riesz_tilde: homogeneity -alpha-Q and positivity on h1") {
  auto h1 = GroupSpec::heisenberg1();
  KernelEvaluator ke(h1);
  const double alpha = 0.8;
  Vec p = v3(0.4, 0.6, -0.3);
  const double ratio = ke.riesz_tilde(alpha, dilate(h1, 2.0, p)) / ke.riesz_tilde(alpha, p);
  CHECK(ratio == doctest::Approx(std::pow(2.0, -alpha - 4.0)).epsilon(5e-3));

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 20; ++i) {
    Vec q = v3(u(rng), u(rng), u(rng));
    if (gauge(h1, q) < 0.3) continue;
    CHECK(ke.riesz_tilde(alpha, q) > 0.0);
  }
}

TEST_CASE("rho: kernel-derived homogeneous norm") {
  auto h1 = GroupSpec::heisenberg1();
  KernelEvaluator ke(h1);
  const double alpha = 0.8;
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    Vec p = v3(u(rng), u(rng), u(rng));
    if (gauge(h1, p) < 0.3) continue;
    CHECK(ke.rho(alpha, dilate(h1, 2.0, p)) == doctest::Approx(2.0 * ke.rho(alpha, p)).epsilon(5e-3));
    CHECK(ke.rho(alpha, semicheck(h1, p)) == doctest::Approx(ke.rho(alpha, p)).epsilon(1e-12));
  }
  CHECK(ke.rho(alpha, Vec::Zero(3)) == 0.0);

  // euclidean(3), alpha = 1: rho is a multiple of |x|
  auto e3 = GroupSpec::euclidean(3);
  KernelEvaluator ke3(e3);
  const double r1 = ke3.rho(1.0, v3(1, 0, 0));
  CHECK(ke3.rho(1.0, v3(0, 1, 0)) == doctest::Approx(r1).epsilon(5e-3));
  CHECK(ke3.rho(1.0, v3(0.36, 0.48, 0.8)) == doctest::Approx(r1).epsilon(5e-3));
  CHECK_THROWS(ke3.rho(5.0, v3(1, 0, 0)));
}

TEST_CASE("poisson: classical kernel on euclidean(1) at a = 0") {
  auto e1 = GroupSpec::euclidean(1);
  KernelEvaluator ke(e1);
  CHECK(ke.poisson(0.0, Vec::Zero(1), 1.0) == doctest::Approx(1.0 / kPi).epsilon(2e-3));
  for (double x : {0.5, 1.0, 2.0}) {
    for (double y : {0.25, 1.0, 3.0}) {
      const double ref = y / (kPi * (x * x + y * y));
      CHECK(ke.poisson(0.0, Vec::Constant(1, x), y) == doctest::Approx(ref).epsilon(3e-3));
    }
  }
  CHECK_THROWS(ke.poisson(0.0, Vec::Zero(1), 0.0));
  CHECK_THROWS(ke.poisson(0.0, Vec::Zero(1), -1.0));
}

TEST_CASE("poisson: unit mass via the gamma integral and on the h1 lattice") {
  // with unit-mass h the total mass reduces to
  // C_a y^{1-a} int t^{(a-3)/2} e^{-y^2/4t} dt = 1, checked by quadrature
  for (double a : {-0.4, 0.0, 0.5}) {
    const double C_a = params_from_a(a).C_a;
    const double y = 0.7;
    const int n = 4000;
    const double t_hi = y * y * 1e8;
    const double slo = std::log(y * y / 200.0), shi = std::log(t_hi);
    const double ds = (shi - slo) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double t = std::exp(slo + i * ds);
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      acc += w * std::pow(t, 0.5 * (a - 3.0) + 1.0) * std::exp(-y * y / (4.0 * t));
    }
    // analytic continuation of the pure power tail beyond t_hi
    const double tail = 2.0 / (1.0 - a) * std::pow(t_hi, 0.5 * (a - 1.0));
    CHECK(C_a * std::pow(y, 1.0 - a) * (acc * ds + tail) == doctest::Approx(1.0).epsilon(1e-5));
  }

  // quadrature over the cylindrical reduction inside a gauge ball plus the
  // measured power-law tail (the kernel decays like gauge^{a-1-Q}, so a
  // finite box alone cannot reach 1%)
  CHECK(poisson_mass_h1(0.0, 0.5, 7.0, 0.05, 0.1) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("poisson: joint homogeneity P(d_l p, l y) = l^{-Q} P(p, y)") {
  auto h1 = GroupSpec::heisenberg1();
  KernelEvaluator ke(h1);
  Vec p = v3(0.6, -0.3, 0.4);
  const double y = 0.8, lam = 2.0;
  CHECK(ke.poisson(0.3, dilate(h1, lam, p), lam * y) ==
        doctest::Approx(std::pow(lam, -4.0) * ke.poisson(0.3, p, y)).epsilon(5e-3));
}

TEST_CASE("poisson_convolve: positivity, constants, fourier oracle") {
  auto e1 = GroupSpec::euclidean(1);
  KernelEvaluator ke(e1);
  Lattice lat(Vec::Constant(1, 0.1), IVec::Constant(1, 300));

  auto u = GridFunction::sample(lat, [](const Vec& p) { return std::exp(-p[0] * p[0]); });
  auto v = poisson_convolve(ke, 0.4, u, 0.5);
  CHECK(v.values.minCoeff() >= 0.0);

  auto one = GridFunction::sample(lat, [](const Vec&) { return 1.0; });
  auto vone = poisson_convolve(ke, 0.0, one, 0.5);
  IVec c0 = IVec::Zero(1);
  CHECK(vone.at(c0) == doctest::Approx(1.0).epsilon(0.011));

  // a = 0 gaussian: v(., y) has symbol e^{-y |xi|}
  const int n = 2 * 300 + 1, pad = 4096;
  std::vector<std::complex<double>> uh(pad, 0.0);
  for (int j = 0; j < pad; ++j) {
    std::complex<double> s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = (i - 300) * 0.1;
      s += std::exp(-x * x) * std::exp(std::complex<double>(0, -2.0 * kPi * j * i / pad));
    }
    uh[j] = s;
  }
  auto v0 = poisson_convolve(ke, 0.0, u, 0.5);
  for (int i = 250; i <= 350; i += 20) {
    std::complex<double> s = 0.0;
    for (int j = 0; j < pad; ++j) {
      int jj = j <= pad / 2 ? j : j - pad;
      const double xi = 2.0 * kPi * jj / (pad * 0.1);
      s += std::exp(-0.5 * std::abs(xi)) * uh[j] * std::exp(std::complex<double>(0, 2.0 * kPi * j * i / pad));
    }
    CHECK(v0.values[i] == doctest::Approx(s.real() / pad).epsilon(0.01));
  }
}

TEST_CASE("kernel-of-type bounds: m gauge^{beta-Q} < R_beta < M gauge^{beta-Q}") {
  auto h1 = GroupSpec::heisenberg1();
  KernelEvaluator ke(h1);
  const double beta = 1.4;
  double lo = 1e300, hi = 0.0;
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    Vec p = v3(u(rng), u(rng), u(rng));
    const double g = gauge(h1, p);
    if (g < 0.4) continue;
    const double r = ke.riesz(beta, p) * std::pow(g, 4.0 - beta);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1e3);
  CHECK(hi / lo < 5.0);
}

TEST_CASE("convolution rule R_a * R_b = R_{a+b} (relative L1 on a shell)") {
  auto e3 = GroupSpec::euclidean(3);
  Lattice lat3(Vec::Constant(3, 0.125), IVec::Constant(3, 20));
  CHECK(riesz_convolution_defect(e3, lat3, 1.0, 1.0, 0.3, 0.5) < 0.05);

  auto h1 = GroupSpec::heisenberg1();
  auto lath = h1_lattice(0.15, 16, 139);
  CHECK(riesz_convolution_defect(h1, lath, 1.0, 1.5, 0.45, 0.6) < 0.05);
}

TEST_CASE("R_2 is the fundamental solution: discrete L annihilates it away from e") {
  auto e3 = GroupSpec::euclidean(3);
  const double h = 0.1;
  Lattice lat(Vec::Constant(3, h), IVec::Constant(3, 26));
  auto rep = riesz_fundamental_solution(e3, lat, 20 * h, 23 * h, {8 * h, 12 * h, 16 * h});
  CHECK(rep.shell_residual < 0.05);
  CHECK(rep.flux_drift < 0.05);
  CHECK(rep.charge == doctest::Approx(1.0).epsilon(0.1));  // Gamma normalization
}

TEST_CASE("L R_{2-alpha} is proportional to Rtilde_{-alpha} away from e") {
  // with the stated prefactor of Rtilde the exact relation carries the
  // calibration factor -(2/alpha) (verified analytically on euclidean(3))
  auto e3 = GroupSpec::euclidean(3);
  const double h = 0.1;
  Lattice lat(Vec::Constant(3, h), IVec::Constant(3, 30));
  CHECK(riesz_laplacian_identity_defect(e3, lat, 1.0, 25 * h, 28 * h) < 0.05);
}

TEST_CASE("poisson kernel horizontal derivative decays along a ray") {
  auto h1 = GroupSpec::heisenberg1();
  KernelEvaluator ke(h1);
  const double a = 0.3, y = 0.5, d = 1e-3;
  // |X_1 P| ~ gauge^{a-2-Q} along the x-ray; fit the log-log slope
  std::vector<double> lg, lv;
  for (double x : {2.0, 3.0, 4.5, 6.75}) {
    Vec p = v3(x, 0, 0);
    Vec pp = v3(x + d, 0, 0), pm = v3(x - d, 0, 0);
    // X_1 = d_x + 2y d_z with y = 0 on the ray
    const double der = (ke.poisson(a, pp, y) - ke.poisson(a, pm, y)) / (2 * d);
    lg.push_back(std::log(x));
    lv.push_back(std::log(std::abs(der)));
  }
  const double slope =
      (lv.back() - lv.front()) / (lg.back() - lg.front());
  CHECK(slope < (a - 2.0 - 4.0) + 0.5);
}
