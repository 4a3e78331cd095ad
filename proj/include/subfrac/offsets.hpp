#ifndef SUBFRAC_OFFSETS_HPP
#define SUBFRAC_OFFSETS_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "subfrac/carnot.hpp"

namespace subfrac {

/// Integer indexing of group offsets w = y^{-1} x between lattice nodes.
/// On a group-compatible lattice every such w lies on the (extended) lattice
/// pattern, so kernels of w can be memoized in a dense table addressed by
/// integer steps. Second-layer steps include the bracket drift, whose range
/// widens the table along those axes.
class GroupOffsets {
 public:
  GroupOffsets(const GroupSpec& g, const Lattice& lat) : g_(g), lat_(lat) {
    n_ = g.dim();
    m_ = g.horizontal_dim();
    if (n_ != lat.dim()) throw std::invalid_argument("GroupOffsets: dimension mismatch");
    if (!lat.group_compatible(g))
      throw std::invalid_argument("GroupOffsets: lattice is not group-compatible");
    cij_.assign(static_cast<std::size_t>(n_ - m_) * m_ * m_, 0.0);
    bound_.assign(n_, 0);
    for (int ax = 0; ax < n_; ++ax) bound_[ax] = 2 * lat.extent(ax);
    for (int k = m_; k < n_; ++k) {
      double drift_max = 0.0;
      for (int i = 0; i < m_; ++i)
        for (int j = 0; j < m_; ++j) {
          const double c = -0.5 * g.bracket(k, i, j) * lat.spacing(i) * lat.spacing(j) / lat.spacing(k);
          cij_[static_cast<std::size_t>(k - m_) * m_ * m_ + i * m_ + j] = c;
          drift_max += std::abs(c) * lat.extent(i) * lat.extent(j);
        }
      bound_[k] += static_cast<std::int64_t>(std::ceil(drift_max)) + 1;
    }
    stride_.assign(n_, 1);
    total_ = 1;
    for (int ax = n_ - 1; ax >= 0; --ax) {
      stride_[ax] = total_;
      total_ *= 2 * bound_[ax] + 1;
    }
  }

  std::int64_t table_size() const { return total_; }

  /// Key of w = y^{-1} x from node indices.
  std::int64_t key(const IVec& xi, const IVec& yi) const {
    std::int64_t kk = 0;
    for (int ax = 0; ax < m_; ++ax) kk += (xi[ax] - yi[ax] + bound_[ax]) * stride_[ax];
    for (int k = m_; k < n_; ++k) {
      double drift = 0.0;
      for (int i = 0; i < m_; ++i)
        for (int j = 0; j < m_; ++j)
          drift += cij_[static_cast<std::size_t>(k - m_) * m_ * m_ + i * m_ + j] * yi[i] * xi[j];
      const std::int64_t s = xi[k] - yi[k] + std::llround(drift);
      kk += (s + bound_[k]) * stride_[k];
    }
    return kk;
  }

  /// Key of a plain offset given by integer steps (x = steps, y = 0).
  std::int64_t key_of_steps(const IVec& steps) const {
    std::int64_t kk = 0;
    for (int ax = 0; ax < n_; ++ax) kk += (steps[ax] + bound_[ax]) * stride_[ax];
    return kk;
  }

  Vec point_of_key(std::int64_t kk) const {
    Vec w(n_);
    for (int ax = 0; ax < n_; ++ax) {
      const std::int64_t s = kk / stride_[ax] % (2 * bound_[ax] + 1) - bound_[ax];
      w[ax] = s * lat_.spacing(ax);
    }
    return w;
  }

 private:
  GroupSpec g_;
  Lattice lat_;
  int n_ = 0, m_ = 0;
  std::vector<std::int64_t> bound_, stride_;
  std::vector<double> cij_;
  std::int64_t total_ = 0;
};

}  // namespace subfrac

#endif
