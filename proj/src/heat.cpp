#include "subfrac/heat.hpp"

#include <cmath>
#include <mutex>
#include <random>
#include <stdexcept>

#include "subfrac/offsets.hpp"
#include "subfrac/parallel.hpp"

namespace subfrac {

namespace {

constexpr double kPi = 3.14159265358979323846;

double gauss_kernel(double t, double dist2, int n) {
  return std::pow(4.0 * kPi * t, -0.5 * n) * std::exp(-dist2 / (4.0 * t));
}

// lambda / sinh(4 lambda t) and lambda * coth(4 lambda t) with small-u series.
inline void h1_factors(double lam, double t, double* a, double* b) {
  const double u = 4.0 * lam * t;
  if (u < 1e-4) {
    const double u2 = u * u;
    const double inv4t = 1.0 / (4.0 * t);
    *a = inv4t * (1.0 - u2 / 6.0 + 7.0 * u2 * u2 / 360.0);
    *b = inv4t * (1.0 + u2 / 3.0 - u2 * u2 / 45.0);
  } else if (u > 700.0) {
    *a = 0.0;
    *b = lam;
  } else {
    *a = lam / std::sinh(u);
    *b = lam / std::tanh(u);
  }
}

}  // namespace

struct HeatKernel::Table {
  double dr, dz, rmax, zmax;
  int nr, nz;
  std::vector<double> v;  // h(1, r, z), row-major over (ir, iz)

  double lookup(double r, double z) const {
    z = std::abs(z);
    if (r >= rmax || z >= zmax) return 0.0;
    const double fr = r / dr, fz = z / dz;
    const int ir = static_cast<int>(fr), iz = static_cast<int>(fz);
    const double wr = fr - ir, wz = fz - iz;
    const double* p0 = &v[static_cast<std::size_t>(ir) * nz + iz];
    const double* p1 = p0 + nz;
    return (1 - wr) * ((1 - wz) * p0[0] + wz * p0[1]) + wr * ((1 - wz) * p1[0] + wz * p1[1]);
  }
};

HeatKernel::HeatKernel(const GroupSpec& g) : g_(g) {
  if (g.kind() == GroupKind::Product) base_ = std::make_unique<HeatKernel>(*g.base());
}

double HeatKernel::h1_direct(double t, double r2, double z) const {
  z = std::abs(z);
  // analytic strip bound: poles of lambda/sinh(4 lambda t) sit at pi/(4t),
  // so h decays at least like exp(-pi z / 4t) relative to its own scale;
  // beyond that the value is negligible against t^{-2}
  if (kPi * z / (4.0 * t) > 46.0) return 0.0;
  // cutoff where exp(-lam (4t + r2)) has decayed past 1e-20
  const double decay = 4.0 * t + r2;
  const double lam_max = 48.0 / decay;
  auto f = [&](double lam) {
    double a, b;
    h1_factors(lam, t, &a, &b);
    const double e = b * r2;
    return (e > 700.0 || a == 0.0) ? 0.0 : a * std::exp(-e) * std::cos(lam * z);
  };
  // step-halving trapezoid; integrand analytic in a strip, converges fast
  // once the cosine is resolved, so start above the oscillation count. The
  // convergence floor follows the unsigned mass: heavy cancellation leaves
  // roundoff noise of that scale, and values below it are effectively zero.
  const double cycles = lam_max * z / (2.0 * kPi);
  int n0 = 64;
  while (n0 < 8.0 * cycles && n0 < (1 << 20)) n0 *= 2;
  double h = lam_max / n0;
  double sum = 0.5 * (f(0.0) + f(lam_max));
  double mass = 0.5 * (std::abs(f(0.0)) + std::abs(f(lam_max)));
  for (int i = 1; i < n0; ++i) {
    const double v = f(i * h);
    sum += v;
    mass += std::abs(v);
  }
  double prev = sum * h;
  const double floor_abs = 1e-13 * mass * h + 1e-300;
  for (int level = 0; level < 10; ++level) {
    double add = 0.0;
    for (double lam = 0.5 * h; lam < lam_max; lam += h) add += f(lam);
    const double cur = 0.5 * prev + 0.5 * h * add;
    if (level >= 1 && std::abs(cur - prev) <= 1e-12 * std::abs(cur) + floor_abs) {
      prev = cur;
      break;
    }
    prev = cur;
    h *= 0.5;
  }
  return std::max(prev / (kPi * kPi), 0.0);
}

double HeatKernel::eval(double t, const Vec& p) const {
  if (!(t > 0.0)) throw std::invalid_argument("heat eval: t must be > 0");
  if (p.size() != g_.dim()) throw std::invalid_argument("heat eval: dimension mismatch");
  switch (g_.kind()) {
    case GroupKind::Euclidean:
      return gauss_kernel(t, p.squaredNorm(), g_.dim());
    case GroupKind::Heisenberg1:
      return h1_direct(t, p[0] * p[0] + p[1] * p[1], p[2]);
    case GroupKind::Product: {
      const int yc = g_.product_coord();
      Vec pb(g_.dim() - 1);
      int w = 0;
      for (int i = 0; i < g_.dim(); ++i)
        if (i != yc) pb[w++] = p[i];
      return base_->eval(t, pb) * gauss_kernel(t, p[yc] * p[yc], 1);
    }
  }
  return 0.0;
}

void HeatKernel::ensure_table() const {
  if (g_.kind() == GroupKind::Product) { base_->ensure_table(); return; }
  if (g_.kind() != GroupKind::Heisenberg1 || table_) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (table_) return;
  auto tab = std::make_shared<Table>();
  tab->dr = 0.02;
  tab->dz = 0.04;
  tab->rmax = 12.0;
  tab->zmax = 34.0;
  tab->nr = static_cast<int>(tab->rmax / tab->dr) + 2;
  tab->nz = static_cast<int>(tab->zmax / tab->dz) + 2;
  tab->v.assign(static_cast<std::size_t>(tab->nr) * tab->nz, 0.0);
  auto* tp = tab.get();
  parallel_for(tp->nr, [&](std::int64_t ir) {
    const double r = ir * tp->dr;
    for (int iz = 0; iz < tp->nz; ++iz) {
      const double z = iz * tp->dz;
      tp->v[static_cast<std::size_t>(ir) * tp->nz + iz] = h1_direct(1.0, r * r, z);
    }
  });
  table_ = tab;
}

double HeatKernel::eval_fast(double t, const Vec& p) const {
  switch (g_.kind()) {
    case GroupKind::Euclidean:
      return eval(t, p);
    case GroupKind::Heisenberg1: {
      if (!table_) ensure_table();
      const double st = std::sqrt(t);
      const double r = std::hypot(p[0], p[1]) / st;
      const double z = p[2] / t;
      return table_->lookup(r, z) / (t * t);
    }
    case GroupKind::Product: {
      const int yc = g_.product_coord();
      Vec pb(g_.dim() - 1);
      int w = 0;
      for (int i = 0; i < g_.dim(); ++i)
        if (i != yc) pb[w++] = p[i];
      return base_->eval_fast(t, pb) * gauss_kernel(t, p[yc] * p[yc], 1);
    }
  }
  return 0.0;
}

GridFunction heat_convolve(const HeatKernel& hk, double t, const GridFunction& u) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_convolve: t must be > 0");
  const Lattice& lat = u.lattice;
  const GroupSpec& g = hk.group();
  GroupOffsets ox(g, lat);
  const std::int64_t nn = lat.size();
  std::vector<IVec> idx(nn);
  for (std::int64_t f = 0; f < nn; ++f) idx[f] = lat.unflat(f);
  std::vector<std::int64_t> support;
  for (std::int64_t y = 0; y < nn; ++y)
    if (u.values[y] != 0.0) support.push_back(y);

  // pass 1: mark needed offsets (concurrent duplicate writes are benign)
  std::vector<char> needed(ox.table_size(), 0);
  parallel_for(nn, [&](std::int64_t x) {
    for (std::int64_t y : support) needed[ox.key(idx[x], idx[y])] = 1;
  });
  std::vector<std::int64_t> list;
  for (std::int64_t kk = 0; kk < ox.table_size(); ++kk)
    if (needed[kk]) list.push_back(kk);

  // pass 2: evaluate kernel per offset
  std::vector<double> kv(ox.table_size(), 0.0);
  parallel_for(static_cast<std::int64_t>(list.size()),
               [&](std::int64_t i) { kv[list[i]] = hk.eval(t, ox.point_of_key(list[i])); });

  // pass 3: accumulate
  GridFunction out(lat, u.margin);
  const double vol = lat.cell_volume();
  parallel_for(nn, [&](std::int64_t x) {
    double s = 0.0;
    for (std::int64_t y : support) s += u.values[y] * kv[ox.key(idx[x], idx[y])];
    out.values[x] = s * vol;
  });
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

McResult mc_estimate(const GroupSpec& g, double t, const Lattice& lat,
                     const std::vector<IVec>& cells, const McConfig& cfg) {
  if (cfg.paths <= 0) throw std::invalid_argument("mc_estimate: zero paths");
  if (!(t > 0.0)) throw std::invalid_argument("mc_estimate: t must be > 0");
  const int n = g.dim(), m = g.horizontal_dim();
  const double T = 2.0 * t;  // generator calibration: time 2t realizes exp(t sum X_j^2)
  const int steps = std::max(cfg.min_steps, static_cast<int>(std::ceil(cfg.steps_per_unit_time * T)));
  const double dt = T / steps;
  const double sdt = std::sqrt(dt);

  const int nt = thread_count();
  std::vector<std::vector<std::int64_t>> counts(nt, std::vector<std::int64_t>(cells.size(), 0));
  std::vector<std::int64_t> inside(nt, 0);
  std::vector<Vec> s1(nt, Vec::Zero(n)), s2(nt, Vec::Zero(n));

  std::vector<std::pair<Vec, Vec>> boxes(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    Vec ctr = lat.point(cells[c]);
    Vec half(n);
    for (int i = 0; i < n; ++i) half[i] = 0.5 * lat.spacing(i);
    boxes[c] = {ctr - half, ctr + half};
  }

  const std::int64_t per = (cfg.paths + nt - 1) / nt;
  parallel_for(nt, [&](std::int64_t tid) {
    const std::int64_t lo = tid * per, hi = std::min<std::int64_t>(cfg.paths, lo + per);
    Vec x(n), dw(m);
    for (std::int64_t path = lo; path < hi; ++path) {
      std::mt19937_64 rng(splitmix64(cfg.seed ^ (0x5851f42d4c957f2dULL * (path + 1))));
      std::normal_distribution<double> nd(0.0, 1.0);
      x.setZero();
      for (int s = 0; s < steps; ++s) {
        for (int j = 0; j < m; ++j) dw[j] = sdt * nd(rng);
        // Stratonovich midpoint: second-layer coefficients evaluated at the
        // half-updated first layer
        for (int k = m; k < n; ++k) {
          double inc = 0.0;
          for (int j = 0; j < m; ++j) {
            double c = 0.0;
            for (int i = 0; i < m; ++i) c += g.bracket(k, i, j) * (x[i] + 0.5 * dw[i]);
            inc += 0.5 * c * dw[j];
          }
          x[k] += inc;
        }
        for (int j = 0; j < m; ++j) x[j] += dw[j];
      }
      for (int i = 0; i < n; ++i) {
        s1[tid][i] += x[i];
        s2[tid][i] += x[i] * x[i];
      }
      bool in = true;
      for (int i = 0; i < n && in; ++i)
        in = std::abs(x[i] - lat.origin()[i]) <= lat.extent(i) * lat.spacing(i) + 0.5 * lat.spacing(i);
      if (in) ++inside[tid];
      for (std::size_t c = 0; c < cells.size(); ++c) {
        bool hit = true;
        for (int i = 0; i < n && hit; ++i)
          hit = x[i] >= boxes[c].first[i] && x[i] < boxes[c].second[i];
        if (hit) ++counts[tid][c];
      }
    }
  });

  McResult res;
  res.density = Vec::Zero(cells.size());
  res.stderr_ = Vec::Zero(cells.size());
  res.coord_mean = Vec::Zero(n);
  res.coord_var = Vec::Zero(n);
  const double vol = lat.cell_volume();
  const double N = cfg.paths;
  double ins = 0;
  for (int tid = 0; tid < nt; ++tid) {
    ins += inside[tid];
    res.coord_mean += s1[tid];
    res.coord_var += s2[tid];
    for (std::size_t c = 0; c < cells.size(); ++c) res.density[c] += counts[tid][c];
  }
  res.coord_mean /= N;
  res.coord_var = res.coord_var / N - res.coord_mean.cwiseProduct(res.coord_mean);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const double p = res.density[c] / N;
    res.density[c] = p / vol;
    res.stderr_[c] = std::sqrt(std::max(p * (1.0 - p), 1e-300) / N) / vol;
  }
  res.mass = ins / N;
  res.mass_stderr = std::sqrt(res.mass * (1.0 - res.mass) / N);
  return res;
}

HeatProvider HeatProvider::analytic(const GroupSpec& g) {
  HeatProvider p{Kind::abelian, g, {}, 0.5};
  const GroupSpec* leaf = &g;
  while (leaf->kind() == GroupKind::Product) leaf = leaf->base();
  if (leaf->kind() == GroupKind::Heisenberg1) p.kind = Kind::heisenberg1_integral;
  return p;
}

HeatProvider HeatProvider::monte_carlo(const GroupSpec& g, const McConfig& cfg, double cell_width) {
  return HeatProvider{Kind::monte_carlo, g, cfg, cell_width};
}

double heat_eval(const HeatProvider& prov, double t, const Vec& p, double* stderr_out) {
  if (prov.kind == HeatProvider::Kind::monte_carlo) {
    // one-cell kernel density estimate centered at p
    const int n = prov.group.dim();
    Vec h = Vec::Constant(n, prov.mc_cell_width);
    IVec ext = IVec::Constant(n, 1);
    Lattice cell(h, ext, p);
    std::vector<IVec> cells{IVec::Zero(n)};
    McResult r = mc_estimate(prov.group, t, cell, cells, prov.mc);
    if (stderr_out) *stderr_out = r.stderr_[0];
    return r.density[0];
  }
  if (stderr_out) *stderr_out = 0.0;
  HeatKernel hk(prov.group);
  return hk.eval(t, p);
}

}  // namespace subfrac
