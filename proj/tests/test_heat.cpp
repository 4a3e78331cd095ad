#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "subfrac/carnot.hpp"
#include "subfrac/heat.hpp"

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

double lattice_mass(const HeatKernel& hk, double t, const Lattice& lat) {
  double s = 0.0;
  for (std::int64_t f = 0; f < lat.size(); ++f) s += hk.eval(t, lat.point(lat.unflat(f)));
  return s * lat.cell_volume();
}

}  // namespace

TEST_CASE("abelian closed form: value, PDE, unit mass") {
  auto e1 = GroupSpec::euclidean(1);
  HeatKernel hk(e1);
  Vec p0 = Vec::Zero(1);
  CHECK(hk.eval(1.0, p0) == doctest::Approx(std::pow(4.0 * kPi, -0.5)).epsilon(1e-12));

  // oracle: d_t h + L h = 0 with L = -d_xx, by central differences
  const double t = 0.8, d = 1e-4;
  auto at = [&](double tt, double xx) {
    Vec q(1);
    q << xx;
    return hk.eval(tt, q);
  };
  const double dt = (at(t + d, 0.7) - at(t - d, 0.7)) / (2 * d);
  const double dxx = (at(t, 0.7 + d) - 2 * at(t, 0.7) + at(t, 0.7 - d)) / (d * d);
  CHECK(std::abs(dt - dxx) < 1e-6);

  // unit mass by lattice quadrature
  Lattice lat(Vec::Constant(1, 0.05), IVec::Constant(1, 400));
  CHECK(lattice_mass(hk, 1.0, lat) == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS(hk.eval(0.0, p0));
  CHECK_THROWS(hk.eval(-1.0, p0));
}

TEST_CASE("heisenberg1: h(t,e) t^2 constant and homogeneity") {
  auto h1 = GroupSpec::heisenberg1();
  HeatKernel hk(h1);
  Vec e = Vec::Zero(3);
  const double c = hk.eval(1.0, e);
  for (double t : {0.5, 1.0, 2.0}) CHECK(hk.eval(t, e) * t * t == doctest::Approx(c).epsilon(1e-9));
  // within the derivation, h(t, e) = 1/(64 t^2); kept as a regression anchor
  CHECK(c == doctest::Approx(1.0 / 64.0).epsilon(1e-9));

  Vec p(3);
  p << 0.3, 0.5, 0.7;
  const double lam = 2.0;
  CHECK(std::pow(lam, 4) * hk.eval(lam * lam * 1.0, dilate(h1, lam, p)) ==
        doctest::Approx(hk.eval(1.0, p)).epsilon(1e-9));
}

TEST_CASE("heisenberg1: unit mass and semicheck symmetry") {
  auto h1 = GroupSpec::heisenberg1();
  HeatKernel hk(h1);
  auto lat = h1_lattice(0.4, 20, 38);  // x,y in +-8, z in +-12.16
  CHECK(lattice_mass(hk, 1.0, lat) == doctest::Approx(1.0).epsilon(0.01));

  Vec p(3);
  p << 0.4, -0.8, 0.9;
  CHECK(hk.eval(0.7, semicheck(h1, p)) == doctest::Approx(hk.eval(0.7, p)).epsilon(1e-12));
  // inversion symmetry h(w^{-1}) = h(w) (self-adjointness)
  CHECK(hk.eval(0.7, inverse(h1, p)) == doctest::Approx(hk.eval(0.7, p)).epsilon(1e-12));
}

TEST_CASE("heisenberg1: monte carlo oracle agrees within 3 standard errors") {
  auto h1 = GroupSpec::heisenberg1();
  HeatKernel hk(h1);
  auto lat = h1_lattice(0.5, 8, 16);
  McConfig cfg;
  cfg.seed = 42;
  cfg.paths = 40000;
  std::vector<IVec> cells;
  IVec c1(3);
  c1 << 2, 0, 0;  // (1, 0, 0)
  cells.push_back(c1);
  IVec c2 = IVec::Zero(3);
  cells.push_back(c2);
  McResult r = mc_estimate(h1, 1.0, lat, cells, cfg);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double ref = hk.eval(1.0, lat.point(cells[i]));
    CHECK(std::abs(r.density[i] - ref) < 3.0 * r.stderr_[i] + 0.03 * ref);
  }
}

TEST_CASE("mc_estimate: abelian density, mass, variance growth") {
  auto e1 = GroupSpec::euclidean(1);
  Lattice lat(Vec::Constant(1, 0.25), IVec::Constant(1, 40));
  McConfig cfg;
  cfg.seed = 7;
  cfg.paths = 60000;
  std::vector<IVec> cells{IVec::Zero(1)};
  McResult r = mc_estimate(e1, 1.0, lat, cells, cfg);
  const double ref = std::pow(4.0 * kPi, -0.5);  // 0.28209
  CHECK(std::abs(r.density[0] - ref) < 3.0 * r.stderr_[0] + 0.01 * ref);
  CHECK(r.mass == doctest::Approx(1.0).epsilon(0.01));

  // horizontal coordinates are martingales with var = 2t
  auto h1 = GroupSpec::heisenberg1();
  auto lath = h1_lattice(0.5, 8, 16);
  McConfig cfg2;
  cfg2.seed = 11;
  cfg2.paths = 30000;
  std::vector<IVec> none;
  McResult r1 = mc_estimate(h1, 0.5, lath, none, cfg2);
  McResult r2 = mc_estimate(h1, 1.0, lath, none, cfg2);
  CHECK(r1.coord_var[0] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(r2.coord_var[0] == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::abs(r2.coord_mean[0]) < 0.03);

  McConfig bad;
  bad.paths = 0;
  CHECK_THROWS(mc_estimate(e1, 1.0, lat, cells, bad));
}

TEST_CASE("heat_convolve: approximate identity and constants") {
  auto e1 = GroupSpec::euclidean(1);
  HeatKernel hk(e1);
  Lattice lat(Vec::Constant(1, 0.05), IVec::Constant(1, 120));

  // indicator of one cell: small-t convolution keeps its mass near the cell
  // (t chosen so the kernel width ~2 cells stays lattice-resolved)
  GridFunction ind(lat);
  IVec c0 = IVec::Zero(1);
  ind.at(c0) = 1.0 / lat.cell_volume();  // unit mass
  auto out = heat_convolve(hk, 0.005, ind);
  double near = 0.0, total = 0.0;
  for (std::int64_t f = 0; f < lat.size(); ++f) {
    IVec idx = lat.unflat(f);
    total += out.values[f];
    if (std::abs(idx[0]) <= 8) near += out.values[f];
  }
  CHECK(near / total > 0.99);
  CHECK(total * lat.cell_volume() == doctest::Approx(1.0).epsilon(0.01));

  // constant input reproduced in the interior
  auto cst = GridFunction::sample(lat, [](const Vec&) { return 2.5; });
  auto outc = heat_convolve(hk, 0.5, cst);
  CHECK(outc.at(c0) == doctest::Approx(2.5).epsilon(0.01));
}

TEST_CASE("heat_convolve: gaussian algebra oracle on euclidean(1)") {
  auto e1 = GroupSpec::euclidean(1);
  HeatKernel hk(e1);
  Lattice lat(Vec::Constant(1, 0.1), IVec::Constant(1, 100));
  const double s2 = 0.5;  // input variance
  auto gauss = GridFunction::sample(
      lat, [&](const Vec& p) { return std::exp(-p[0] * p[0] / (2 * s2)) / std::sqrt(2 * kPi * s2); });
  const double t = 0.4;  // heat kernel variance 2t
  auto out = heat_convolve(hk, t, gauss);
  const double sv = s2 + 2 * t;
  for (int i = -40; i <= 40; i += 5) {
    IVec idx(1);
    idx << i;
    const double x = lat.point(idx)[0];
    const double ref = std::exp(-x * x / (2 * sv)) / std::sqrt(2 * kPi * sv);
    CHECK(out.at(idx) == doctest::Approx(ref).epsilon(0.005));
  }
}

TEST_CASE("semigroup property on both groups (relative L1)") {
  auto check_semigroup = [](const GroupSpec& g, const Lattice& lat, double t, double s) {
    HeatKernel hk(g);
    auto ht = GridFunction::sample(lat, [&](const Vec& p) { return hk.eval(t, p); });
    auto conv = heat_convolve(hk, s, ht);
    double num = 0.0, den = 0.0;
    for (std::int64_t f = 0; f < lat.size(); ++f) {
      const double ref = hk.eval(t + s, lat.point(lat.unflat(f)));
      num += std::abs(conv.values[f] - ref);
      den += std::abs(ref);
    }
    return num / den;
  };
  auto e1 = GroupSpec::euclidean(1);
  CHECK(check_semigroup(e1, Lattice(Vec::Constant(1, 0.08), IVec::Constant(1, 120)), 0.5, 0.5) < 0.02);
  auto h1 = GroupSpec::heisenberg1();
  CHECK(check_semigroup(h1, h1_lattice(0.5, 11, 22), 0.5, 0.5) < 0.02);
}

TEST_CASE("product group kernel factorizes and scales") {
  auto gh = GroupSpec::product(GroupSpec::heisenberg1());
  HeatKernel hk(gh);
  HeatKernel hk1(GroupSpec::heisenberg1());
  Vec p(4);
  p << 0.3, -0.2, 0.8, 0.4;  // (x, y, extra, z)
  Vec pb(3);
  pb << 0.3, -0.2, 0.4;
  const double t = 0.7;
  const double gf = std::pow(4.0 * kPi * t, -0.5) * std::exp(-0.8 * 0.8 / (4 * t));
  CHECK(hk.eval(t, p) == doctest::Approx(hk1.eval(t, pb) * gf).epsilon(1e-10));
  // scaling with Q = 5
  CHECK(std::pow(2.0, 5) * hk.eval(4.0 * t, dilate(gh, 2.0, p)) ==
        doctest::Approx(hk.eval(t, p)).epsilon(1e-9));
}

TEST_CASE("eval_fast table matches direct quadrature") {
  auto h1 = GroupSpec::heisenberg1();
  HeatKernel hk(h1);
  hk.ensure_table();
  for (double t : {0.3, 1.0, 2.7}) {
    for (double x : {0.0, 0.4, 1.3}) {
      for (double z : {0.0, -0.6, 1.9}) {
        Vec p(3);
        p << x, 0.2, z;
        const double a = hk.eval(t, p), b = hk.eval_fast(t, p);
        CHECK(std::abs(a - b) < 2e-4 * std::abs(a) + 1e-7);
      }
    }
  }
}

TEST_CASE("heat provider facade") {
  auto h1 = GroupSpec::heisenberg1();
  auto prov = HeatProvider::analytic(h1);
  CHECK(prov.kind == HeatProvider::Kind::heisenberg1_integral);
  Vec p(3);
  p << 1.0, 0.0, 0.0;
  HeatKernel hk(h1);
  CHECK(heat_eval(prov, 1.0, p) == doctest::Approx(hk.eval(1.0, p)));

  McConfig cfg;
  cfg.seed = 3;
  cfg.paths = 20000;
  auto mc = HeatProvider::monte_carlo(h1, cfg, 0.5);
  double se = 0.0;
  const double est = heat_eval(mc, 1.0, p, &se);
  CHECK(se > 0.0);
  CHECK(std::abs(est - hk.eval(1.0, p)) < 3.0 * se + 0.03 * hk.eval(1.0, p));
}
