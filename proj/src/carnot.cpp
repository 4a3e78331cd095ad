#include "subfrac/carnot.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace subfrac {

namespace {

void check_dim(const GroupSpec& g, const Vec& p, const char* op) {
  if (p.size() != g.dim())
    throw std::invalid_argument(std::string(op) + ": point dimension " +
                                std::to_string(p.size()) + " does not match group dimension " +
                                std::to_string(g.dim()));
}

}  // namespace

GroupSpec::GroupSpec() { *this = euclidean(1); }

GroupSpec GroupSpec::euclidean(int n) {
  if (n < 1) throw std::invalid_argument("euclidean: n must be >= 1");
  GroupSpec g{Raw{}};
  g.kind_ = GroupKind::Euclidean;
  g.n_ = n;
  g.m_ = n;
  g.step_ = 1;
  g.q_ = n;
  g.d_.assign(n, 1);
  return g;
}

GroupSpec GroupSpec::heisenberg1() {
  GroupSpec g{Raw{}};
  g.kind_ = GroupKind::Heisenberg1;
  g.n_ = 3;
  g.m_ = 2;
  g.step_ = 2;
  g.q_ = 4;
  g.d_ = {1, 1, 2};
  // [e1, e2] = -4 e_z, matching the frame X1 = dx + 2y dz, X2 = dy - 2x dz.
  g.brk_.assign(4, 0.0);
  g.brk_[g.idx(2, 0, 1)] = -4.0;
  g.brk_[g.idx(2, 1, 0)] = 4.0;
  return g;
}

GroupSpec GroupSpec::product(const GroupSpec& base) {
  GroupSpec g{Raw{}};
  g.kind_ = GroupKind::Product;
  g.base_ = std::make_shared<GroupSpec>(base);
  g.n_ = base.n_ + 1;
  g.m_ = base.m_ + 1;
  g.step_ = base.step_;
  g.q_ = base.q_ + 1;
  g.prod_coord_ = base.m_;  // appended at the end of the first layer
  g.d_.reserve(g.n_);
  for (int i = 0; i < base.m_; ++i) g.d_.push_back(1);
  g.d_.push_back(1);
  for (int i = base.m_; i < base.n_; ++i) g.d_.push_back(base.d_[i]);
  // Re-indexed brackets: the new coordinate brackets to zero.
  const int m = g.m_;
  g.brk_.assign(static_cast<std::size_t>(g.n_ - m) * m * m, 0.0);
  for (int k = base.m_; k < base.n_; ++k)
    for (int i = 0; i < base.m_; ++i)
      for (int j = 0; j < base.m_; ++j)
        g.brk_[g.idx(k + 1, i, j)] = base.bracket(k, i, j);
  return g;
}

double GroupSpec::field_coeff(int j, int k, const Vec& x) const {
  // p_{j,k}(x) = 1/2 [x, e_j]_k = 1/2 sum_i bracket(k, i, j) x_i
  double s = 0.0;
  for (int i = 0; i < m_; ++i) s += bracket(k, i, j) * x[i];
  return 0.5 * s;
}

std::string GroupSpec::name() const {
  switch (kind_) {
    case GroupKind::Euclidean: return "euclidean(" + std::to_string(n_) + ")";
    case GroupKind::Heisenberg1: return "heisenberg1";
    case GroupKind::Product: return "product(" + base_->name() + ")";
  }
  return "?";
}

bool GroupSpec::same_as(const GroupSpec& o) const {
  if (kind_ != o.kind_ || n_ != o.n_ || m_ != o.m_) return false;
  if (kind_ == GroupKind::Product) return base_->same_as(*o.base_);
  return true;
}

Vec mult(const GroupSpec& g, const Vec& p, const Vec& q) {
  check_dim(g, p, "mult");
  check_dim(g, q, "mult");
  Vec r = p + q;
  const int m = g.horizontal_dim();
  for (int k = m; k < g.dim(); ++k) {
    double br = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) br += g.bracket(k, i, j) * p[i] * q[j];
    r[k] += 0.5 * br;
  }
  return r;
}

Vec inverse(const GroupSpec& g, const Vec& p) {
  check_dim(g, p, "inverse");
  return -p;  // exact for step <= 2: p * (-p) collapses layerwise
}

Vec dilate(const GroupSpec& g, double lambda, const Vec& p) {
  check_dim(g, p, "dilate");
  if (!(lambda > 0.0)) throw std::invalid_argument("dilate: lambda must be > 0");
  Vec r(p.size());
  for (int i = 0; i < g.dim(); ++i) r[i] = std::pow(lambda, g.homogeneity()[i]) * p[i];
  return r;
}

Vec semicheck(const GroupSpec& g, const Vec& p) {
  check_dim(g, p, "semicheck");
  Vec r(p.size());
  for (int i = 0; i < g.dim(); ++i) r[i] = (g.homogeneity()[i] % 2 == 0) ? p[i] : -p[i];
  return r;
}

double gauge(const GroupSpec& g, const Vec& p) {
  check_dim(g, p, "gauge");
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < g.dim(); ++i) {
    if (g.homogeneity()[i] == 1)
      s1 += p[i] * p[i];
    else
      s2 += p[i] * p[i];
  }
  return std::pow(s1 * s1 + s2, 0.25);
}

Lattice::Lattice(Vec spacing, IVec extent, Vec origin) : h_(std::move(spacing)), ext_(std::move(extent)) {
  if (h_.size() != ext_.size()) throw std::invalid_argument("Lattice: spacing/extent size mismatch");
  for (int i = 0; i < h_.size(); ++i) {
    if (!(h_[i] > 0)) throw std::invalid_argument("Lattice: spacing must be > 0");
    if (ext_[i] < 0) throw std::invalid_argument("Lattice: extent must be >= 0");
  }
  origin_ = origin.size() ? std::move(origin) : Vec::Zero(h_.size());
  if (origin_.size() != h_.size()) throw std::invalid_argument("Lattice: origin size mismatch");
  size_ = 1;
  vol_ = 1.0;
  for (int i = 0; i < h_.size(); ++i) {
    size_ *= nodes(i);
    vol_ *= h_[i];
  }
}

Vec Lattice::point(const IVec& idx) const {
  Vec p(dim());
  for (int i = 0; i < dim(); ++i) p[i] = origin_[i] + h_[i] * idx[i];
  return p;
}

std::int64_t Lattice::flat(const IVec& idx) const {
  std::int64_t f = 0;
  for (int i = 0; i < dim(); ++i) f = f * nodes(i) + (idx[i] + ext_[i]);
  return f;
}

IVec Lattice::unflat(std::int64_t f) const {
  IVec idx(dim());
  for (int i = dim() - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(f % nodes(i)) - ext_[i];
    f /= nodes(i);
  }
  return idx;
}

bool Lattice::contains(const IVec& idx) const {
  for (int i = 0; i < dim(); ++i)
    if (idx[i] < -ext_[i] || idx[i] > ext_[i]) return false;
  return true;
}

bool Lattice::nearest(const Vec& p, IVec* idx) const {
  idx->resize(dim());
  for (int i = 0; i < dim(); ++i) (*idx)[i] = static_cast<int>(std::lround((p[i] - origin_[i]) / h_[i]));
  return contains(*idx);
}

bool Lattice::group_compatible(const GroupSpec& g, double tol) const {
  if (dim() != g.dim()) return false;
  const int m = g.horizontal_dim();
  for (int k = m; k < g.dim(); ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double b = g.bracket(k, i, j);
        if (b == 0.0) continue;
        const double quantum = 0.5 * std::abs(b) * h_[i] * h_[j] / h_[k];
        if (std::abs(quantum - std::lround(quantum)) > tol) return false;
      }
  return true;
}

bool Lattice::same_as(const Lattice& o) const {
  return dim() == o.dim() && (h_ - o.h_).cwiseAbs().maxCoeff() == 0 && (ext_ == o.ext_) &&
         (origin_ - o.origin_).cwiseAbs().maxCoeff() == 0;
}

bool GridFunction::index_valid(const IVec& idx) const {
  for (int i = 0; i < lattice.dim(); ++i)
    if (std::abs(idx[i]) > lattice.extent(i) - margin) return false;
  return true;
}

GridFunction GridFunction::sample(const Lattice& lat, const std::function<double(const Vec&)>& f) {
  GridFunction g(lat);
  for (std::int64_t i = 0; i < lat.size(); ++i) g.values[i] = f(lat.point(lat.unflat(i)));
  return g;
}

double grid_dot(const GridFunction& a, const GridFunction& b) {
  return a.values.dot(b.values) * a.lattice.cell_volume();
}

double grid_norm(const GridFunction& a) { return std::sqrt(grid_dot(a, a)); }

double rel_l2_interior(const GridFunction& a, const GridFunction& b, int margin_extra) {
  if (!a.lattice.same_as(b.lattice)) throw std::invalid_argument("rel_l2_interior: lattice mismatch");
  const int m = std::max(a.margin, b.margin) + margin_extra;
  double num = 0, den = 0;
  for (std::int64_t f = 0; f < a.lattice.size(); ++f) {
    IVec idx = a.lattice.unflat(f);
    bool ok = true;
    for (int i = 0; i < a.lattice.dim(); ++i)
      if (std::abs(idx[i]) > a.lattice.extent(i) - m) { ok = false; break; }
    if (!ok) continue;
    const double d = a.values[f] - b.values[f];
    num += d * d;
    den += b.values[f] * b.values[f];
  }
  if (den == 0) return std::sqrt(num);
  return std::sqrt(num / den);
}

GridFunction apply_field(const GroupSpec& g, int j, const GridFunction& f) {
  if (j < 0 || j >= g.horizontal_dim()) throw std::invalid_argument("apply_field: j out of range");
  const Lattice& lat = f.lattice;
  if (lat.dim() != g.dim()) throw std::invalid_argument("apply_field: lattice dimension mismatch");
  for (int ax = 0; ax < lat.dim(); ++ax)
    if (lat.extent(ax) < 1) throw std::invalid_argument("apply_field: lattice too small");
  GridFunction out(lat, f.margin + 1);
  const int n = g.dim(), m = g.horizontal_dim();
  for (std::int64_t fl = 0; fl < lat.size(); ++fl) {
    IVec idx = lat.unflat(fl);
    bool interior = true;
    for (int ax = 0; ax < n; ++ax)
      if (std::abs(idx[ax]) > lat.extent(ax) - 1) { interior = false; break; }
    if (!interior) { out.values[fl] = 0.0; continue; }
    const Vec x = lat.point(idx);
    IVec ip = idx, im = idx;
    ip[j] += 1; im[j] -= 1;
    double v = (f.at(ip) - f.at(im)) / (2.0 * lat.spacing(j));
    for (int k = m; k < n; ++k) {
      const double c = g.field_coeff(j, k, x);
      if (c == 0.0) continue;
      IVec kp = idx, km = idx;
      kp[k] += 1; km[k] -= 1;
      v += c * (f.at(kp) - f.at(km)) / (2.0 * lat.spacing(k));
    }
    out.values[fl] = v;
  }
  return out;
}

GridFunction sublaplacian_apply(const GroupSpec& g, const GridFunction& f) {
  for (int ax = 0; ax < f.lattice.dim(); ++ax)
    if (f.lattice.extent(ax) < 2) throw std::invalid_argument("sublaplacian_apply: lattice too small");
  GridFunction out(f.lattice, f.margin + 2);
  for (int j = 0; j < g.horizontal_dim(); ++j) {
    GridFunction d2 = apply_field(g, j, apply_field(g, j, f));
    out.values -= d2.values;
  }
  return out;
}

namespace {

// Horizontal step graph: from each node, flow one horizontal step (exact
// group flow, drift rounded to the nearest node), symmetrized. Besides the
// axis steps +-h_j along X_j, single flows along the diagonal combinations
// X_i +- X_j are included: on drift-exact lattices the axis steps alone
// leave a parity class of the vertical fiber unreachable (closed axis loops
// sweep whole cells only), and the half-cell diagonals break it.
std::vector<std::vector<std::pair<std::int64_t, double>>> step_graph(const GroupSpec& g,
                                                                     const Lattice& lat) {
  const int m = g.horizontal_dim();
  std::vector<std::pair<Vec, double>> moves;  // (horizontal increment, length)
  for (int j = 0; j < m; ++j) {
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      Vec e = Vec::Zero(g.dim());
      e[j] = sgn * lat.spacing(j);
      moves.emplace_back(e, lat.spacing(j));
    }
  }
  if (g.step() >= 2) {
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        for (int si = -1; si <= 1; si += 2)
          for (int sj = -1; sj <= 1; sj += 2) {
            Vec e = Vec::Zero(g.dim());
            e[i] = si * lat.spacing(i);
            e[j] = sj * lat.spacing(j);
            moves.emplace_back(e, std::hypot(lat.spacing(i), lat.spacing(j)));
          }
  }

  const std::int64_t n = lat.size();
  std::vector<std::vector<std::pair<std::int64_t, double>>> adj(n);
  for (std::int64_t f = 0; f < n; ++f) {
    const Vec x = lat.point(lat.unflat(f));
    for (const auto& [e, len] : moves) {
      IVec tgt;
      if (!lat.nearest(mult(g, x, e), &tgt)) continue;
      const std::int64_t tf = lat.flat(tgt);
      if (tf == f) continue;
      adj[f].emplace_back(tf, len);
      adj[tf].emplace_back(f, len);
    }
  }
  return adj;
}

}  // namespace

Vec cc_distances_from(const GroupSpec& g, const Lattice& lat, const Vec& src) {
  IVec si;
  if (!lat.nearest(src, &si) || (lat.point(si) - src).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("cc_distances_from: source is not a lattice node");
  auto adj = step_graph(g, lat);
  const std::int64_t n = lat.size();
  Vec dist = Vec::Constant(n, std::numeric_limits<double>::infinity());
  using QE = std::pair<double, std::int64_t>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
  dist[lat.flat(si)] = 0.0;
  pq.emplace(0.0, lat.flat(si));
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (auto& [v, w] : adj[u]) {
      if (dist[u] + w < dist[v] - 1e-15) {
        dist[v] = dist[u] + w;
        pq.emplace(dist[v], v);
      }
    }
  }
  return dist;
}

double cc_distance_estimate(const GroupSpec& g, const Lattice& lat, const Vec& p, const Vec& q) {
  IVec qi;
  if (!lat.nearest(q, &qi) || (lat.point(qi) - q).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("cc_distance_estimate: target is not a lattice node");
  Vec d = cc_distances_from(g, lat, p);
  return d[lat.flat(qi)];
}

std::pair<double, double> fit_gauge_equivalence(const GroupSpec& g, const Lattice& lat) {
  Vec d = cc_distances_from(g, lat, Vec::Zero(g.dim()));
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::int64_t f = 0; f < lat.size(); ++f) {
    IVec idx = lat.unflat(f);
    if (idx.cwiseAbs().maxCoeff() == 0) continue;
    const double gg = gauge(g, lat.point(idx));
    if (gg <= 0 || !std::isfinite(d[f])) continue;
    const double r = d[f] / gg;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo, hi};
}

}  // namespace subfrac
