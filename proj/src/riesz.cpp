#include "subfrac/riesz.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "subfrac/offsets.hpp"
#include "subfrac/parallel.hpp"
#include "subfrac/special.hpp"

namespace subfrac {

KernelEvaluator::KernelEvaluator(const GroupSpec& g, QuadratureScheme quad)
    : g_(g), quad_(quad), heat_(g) {
  if (quad_.nodes < 64) throw std::invalid_argument("QuadratureScheme: nodes must be >= 64");
  if (quad_.t_max > 0.0 && quad_.t_min > 0.0 && !(quad_.t_min < quad_.t_max))
    throw std::invalid_argument("QuadratureScheme: t_min must be < t_max");
  heat_.ensure_table();
}

double KernelEvaluator::riesz_raw(double beta, const Vec& p) const {
  const double rho2 = std::pow(gauge(g_, p), 2);
  if (!(rho2 > 0.0)) throw std::invalid_argument("riesz: p must differ from the origin");
  const int Q = g_.homogeneous_dim();
  // log-substitution t = rho^2 e^s: the heat factor suppresses s << 0 and
  // the power tail e^{s(beta-Q)/2} suppresses s >> 0.
  double s_lo = -7.0, s_hi;
  if (beta < Q)
    s_hi = std::min(184.0 / (Q - beta), 80.0);
  else
    s_hi = 80.0;
  if (quad_.t_min > 0.0) s_lo = std::log(quad_.t_min / rho2);
  if (quad_.t_max > 0.0) s_hi = std::log(quad_.t_max / rho2);
  const int n = quad_.nodes;
  const double ds = (s_hi - s_lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = s_lo + i * ds;
    const double t = rho2 * std::exp(s);
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * std::pow(t, 0.5 * beta) * heat_.eval_fast(t, p);
  }
  return acc * ds / gamma_fn(0.5 * beta);
}

double KernelEvaluator::riesz(double beta, const Vec& p) const {
  if (!(beta > 0.0) || !(beta < g_.homogeneous_dim()))
    throw std::invalid_argument("riesz: beta must lie in (0, Q)");
  return riesz_raw(beta, p);
}

double KernelEvaluator::riesz_tilde(double alpha, const Vec& p) const {
  if (!(alpha > 0.0) || !(alpha < 2.0))
    throw std::invalid_argument("riesz_tilde: alpha must lie in (0, 2)");
  const double rho2 = std::pow(gauge(g_, p), 2);
  if (!(rho2 > 0.0)) throw std::invalid_argument("riesz_tilde: p must differ from the origin");
  const int Q = g_.homogeneous_dim();
  const double s_lo = -7.0, s_hi = std::min(184.0 / (Q + alpha), 80.0);
  const int n = quad_.nodes;
  const double ds = (s_hi - s_lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = s_lo + i * ds;
    const double t = rho2 * std::exp(s);
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * std::pow(t, -0.5 * alpha) * heat_.eval_fast(t, p);
  }
  // (beta/2)/Gamma(beta/2) with beta = -alpha: positive since Gamma < 0 there
  const double pref = (0.5 * alpha) / std::abs(gamma_fn(-0.5 * alpha));
  const double v = pref * acc * ds;
  if (v < -1e-10 * std::abs(pref * acc * ds + 1e-300))
    throw std::runtime_error("riesz_tilde: positivity audit failed");
  return v;
}

double KernelEvaluator::rho(double alpha, const Vec& p) const {
  const int Q = g_.homogeneous_dim();
  if (!(2.0 - alpha > 0.0) || !(2.0 - alpha < Q))
    throw std::invalid_argument("rho: 2 - alpha must lie in (0, Q)");
  if (gauge(g_, p) == 0.0) return 0.0;
  return std::pow(riesz(2.0 - alpha, p), 1.0 / (2.0 - alpha - Q));
}

double KernelEvaluator::poisson(double a, const Vec& p, double y) const {
  if (!(y > 0.0)) throw std::invalid_argument("poisson: y must be > 0");
  if (!(a > -1.0 && a < 1.0)) throw std::invalid_argument("poisson: a must lie in (-1, 1)");
  const int Q = g_.homogeneous_dim();
  const double rho2 = std::pow(gauge(g_, p), 2);
  // negligible below both suppression scales, power tail above the peak
  const double t_lo = std::max(y * y / 184.0, 2e-3 * rho2 + 1e-300);
  const double t_peak = std::max(y * y, rho2) + t_lo;
  const double decay = 0.5 * (1.0 - a + Q);  // tail exponent of t^{(a-3)/2} h
  const double t_hi = t_peak * std::pow(10.0, std::min(15.0 / decay, 14.0));
  const int n = quad_.nodes;
  const double s_lo = std::log(t_lo), s_hi = std::log(t_hi);
  const double ds = (s_hi - s_lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = std::exp(s_lo + i * ds);
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    const double e = y * y / (4.0 * t);
    if (e > 700.0) continue;
    acc += w * std::pow(t, 0.5 * (a - 3.0) + 1.0) * std::exp(-e) * heat_.eval_fast(t, p);
  }
  const double C_a = params_from_a(a).C_a;
  return std::max(C_a * std::pow(y, 1.0 - a) * acc * ds, 0.0);
}

GridFunction poisson_convolve(const KernelEvaluator& ke, double a, const GridFunction& u, double y) {
  if (!(y > 0.0)) throw std::invalid_argument("poisson_convolve: y must be > 0");
  const Lattice& lat = u.lattice;
  GroupOffsets ox(ke.group(), lat);
  const std::int64_t nn = lat.size();
  std::vector<IVec> idx(nn);
  for (std::int64_t f = 0; f < nn; ++f) idx[f] = lat.unflat(f);
  std::vector<std::int64_t> support;
  for (std::int64_t f = 0; f < nn; ++f)
    if (u.values[f] != 0.0) support.push_back(f);

  std::vector<char> needed(ox.table_size(), 0);
  parallel_for(nn, [&](std::int64_t x) {
    for (std::int64_t yn : support) needed[ox.key(idx[x], idx[yn])] = 1;
  });
  std::vector<std::int64_t> list;
  for (std::int64_t kk = 0; kk < ox.table_size(); ++kk)
    if (needed[kk]) list.push_back(kk);
  std::vector<double> kv(ox.table_size(), 0.0);
  parallel_for(static_cast<std::int64_t>(list.size()),
               [&](std::int64_t i) { kv[list[i]] = ke.poisson(a, ox.point_of_key(list[i]), y); });

  GridFunction out(lat, u.margin);
  const double vol = lat.cell_volume();
  parallel_for(nn, [&](std::int64_t x) {
    double s = 0.0;
    for (std::int64_t yn : support) s += u.values[yn] * kv[ox.key(idx[x], idx[yn])];
    out.values[x] = s * vol;
  });
  return out;
}

double riesz_cell_average(const KernelEvaluator& ke, double beta, const Lattice& lat) {
  const int n = lat.dim();
  const int levels = 7;
  Vec half(n);
  for (int i = 0; i < n; ++i) half[i] = 0.5 * lat.spacing(i);
  double total = 0.0, prev_shell = 0.0, ratio = 0.0;
  for (int lev = 0; lev < levels; ++lev) {
    // shell between the cell scaled by 2^-lev and by 2^-(lev+1): sample the
    // 4^n quarter-subcells and keep those outside the inner half
    const double scale = std::pow(0.5, lev);
    double shell = 0.0;
    const int grid = 4;
    std::vector<int> c(n, 0);
    for (;;) {
      bool inner = true;
      for (int i = 0; i < n; ++i) inner = inner && (c[i] == 1 || c[i] == 2);
      if (!inner) {
        Vec p(n);
        double vol = 1.0;
        for (int i = 0; i < n; ++i) {
          const double w = 2.0 * half[i] * scale / grid;
          p[i] = -half[i] * scale + (c[i] + 0.5) * w;
          vol *= w;
        }
        shell += ke.riesz_raw(beta, p) * vol;
      }
      int ax = 0;
      while (ax < n && ++c[ax] == grid) c[ax++] = 0;
      if (ax == n) break;
    }
    total += shell;
    if (lev > 0 && prev_shell > 0.0) ratio = shell / prev_shell;
    prev_shell = shell;
  }
  // remainder of the innermost cell by geometric continuation
  if (ratio > 0.0 && ratio < 0.999) total += prev_shell * ratio / (1.0 - ratio);
  return total / lat.cell_volume();
}

double KernelDescriptor::eval(const Vec& p, double y) const {
  KernelEvaluator ke(group, quadrature);
  switch (family) {
    case Family::riesz: return ke.riesz(param, p);
    case Family::rtilde: return ke.riesz_tilde(param, p);
    case Family::poisson: return ke.poisson(param, p, y);
  }
  return 0.0;
}

}  // namespace subfrac
