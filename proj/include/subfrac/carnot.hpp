#ifndef SUBFRAC_CARNOT_HPP
#define SUBFRAC_CARNOT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace subfrac {

using Vec = Eigen::VectorXd;
using IVec = Eigen::VectorXi;

enum class GroupKind { Euclidean, Heisenberg1, Product };

/// Stratified group of step <= 2 modeled on R^n through exponential
/// coordinates. Coordinates are ordered by layer: the m coordinates of the
/// horizontal layer first, then the second layer. d[i] is the homogeneity
/// exponent of coordinate i (1 on the first layer, 2 on the second), and
/// Q = sum d[i] is the homogeneous dimension.
///
/// The group law is the step-2 Campbell-Hausdorff product
///   (p * q)_first  = p + q,
///   (p * q)_second = p + q + (1/2) [p, q],
/// with the bracket stored as antisymmetric structure constants:
/// [e_i, e_j] = sum_k bracket(k, i, j) e_k over second-layer k.
///
/// Normalization is pinned by the Heisenberg frame X1 = dx + 2y dz,
/// X2 = dy - 2x dz, i.e. [X1, X2] = -4 dz on heisenberg1; every kernel
/// constant downstream inherits this calibration.
class GroupSpec {
 public:
  GroupSpec();  // euclidean(1)
  static GroupSpec euclidean(int n);
  static GroupSpec heisenberg1();
  /// base x R. The extra coordinate commutes with everything, has
  /// homogeneity 1 and is stored at the end of the first layer so that the
  /// homogeneity vector stays nondecreasing.
  static GroupSpec product(const GroupSpec& base);

  GroupKind kind() const { return kind_; }
  int dim() const { return n_; }
  int step() const { return step_; }
  int horizontal_dim() const { return m_; }
  int homogeneous_dim() const { return q_; }
  const std::vector<int>& homogeneity() const { return d_; }

  /// Structure constant of [e_i, e_j] on second-layer coordinate k
  /// (m <= k < n, 0 <= i,j < m).
  double bracket(int k, int i, int j) const { return brk_[idx(k, i, j)]; }

  /// Coefficient p_{j,k}(x) of the left-invariant frame
  /// X_j = d_j + sum_{k in second layer} p_{j,k}(x) d_k.
  double field_coeff(int j, int k, const Vec& x) const;

  const GroupSpec* base() const { return base_.get(); }
  /// Index of the coordinate appended by product(); -1 otherwise.
  int product_coord() const { return prod_coord_; }
  std::string name() const;

  bool same_as(const GroupSpec& o) const;

 private:
  struct Raw {};
  explicit GroupSpec(Raw) {}
  std::size_t idx(int k, int i, int j) const {
    return static_cast<std::size_t>(k - m_) * m_ * m_ + i * static_cast<std::size_t>(m_) + j;
  }

  GroupKind kind_ = GroupKind::Euclidean;
  int n_ = 0, m_ = 0, step_ = 1, q_ = 0;
  std::vector<int> d_;
  std::vector<double> brk_;  // (n - m) antisymmetric m x m blocks
  std::shared_ptr<const GroupSpec> base_;
  int prod_coord_ = -1;
};

Vec mult(const GroupSpec& g, const Vec& p, const Vec& q);
Vec inverse(const GroupSpec& g, const Vec& p);
Vec dilate(const GroupSpec& g, double lambda, const Vec& p);
Vec semicheck(const GroupSpec& g, const Vec& p);

/// Koranyi-type homogeneous norm: ((sum_{d=1} x_i^2)^2 + sum_{d=2} x_k^2)^{1/4}.
/// Exactly 1-homogeneous under dilations and semicheck-invariant; used for
/// ball scanning and quadrature splits (kernel mathematics uses rho).
double gauge(const GroupSpec& g, const Vec& p);

/// Uniform Cartesian lattice in exponential coordinates. Axis i carries
/// 2*extent[i]+1 nodes at spacing h[i]; node index 0 sits at the origin.
class Lattice {
 public:
  Lattice() = default;
  Lattice(Vec spacing, IVec extent, Vec origin = Vec());

  int dim() const { return static_cast<int>(h_.size()); }
  std::int64_t size() const { return size_; }
  double spacing(int axis) const { return h_[axis]; }
  const Vec& spacings() const { return h_; }
  int extent(int axis) const { return ext_[axis]; }
  int nodes(int axis) const { return 2 * ext_[axis] + 1; }
  double cell_volume() const { return vol_; }
  const Vec& origin() const { return origin_; }

  Vec point(const IVec& idx) const;
  std::int64_t flat(const IVec& idx) const;
  IVec unflat(std::int64_t f) const;
  bool contains(const IVec& idx) const;
  /// Nearest node to p; returns false when the rounded index leaves the box.
  bool nearest(const Vec& p, IVec* idx) const;

  /// True when every bracket drift quantum 2 h_i h_j is an integer multiple
  /// of the second-layer spacing it lands on; group translations between
  /// nodes are then lattice-exact.
  bool group_compatible(const GroupSpec& g, double tol = 1e-9) const;

  bool same_as(const Lattice& o) const;

 private:
  Vec h_, origin_;
  IVec ext_;
  std::int64_t size_ = 0;
  double vol_ = 0;
};

/// Real-valued function sampled on a lattice. margin counts boundary rings
/// whose values are not trusted (each derivative order consumes one ring).
struct GridFunction {
  Lattice lattice;
  Vec values;
  int margin = 0;

  GridFunction() = default;
  GridFunction(const Lattice& lat, int m = 0)
      : lattice(lat), values(Vec::Zero(lat.size())), margin(m) {}

  double at(const IVec& idx) const { return values[lattice.flat(idx)]; }
  double& at(const IVec& idx) { return values[lattice.flat(idx)]; }
  /// Index lies in the trusted region (margin rings removed).
  bool index_valid(const IVec& idx) const;

  static GridFunction sample(const Lattice& lat, const std::function<double(const Vec&)>& f);
};

/// Inner product / norms weighted by the cell volume.
double grid_dot(const GridFunction& a, const GridFunction& b);
double grid_norm(const GridFunction& a);

/// Relative l2 distance over the common trusted region of a and b (both on
/// the same lattice); margin_extra shrinks the region further.
double rel_l2_interior(const GridFunction& a, const GridFunction& b, int margin_extra = 0);

/// Horizontal derivative X_j f by centered differences combined with the
/// polynomial frame coefficients. One more boundary ring becomes invalid.
GridFunction apply_field(const GroupSpec& g, int j, const GridFunction& f);

/// Positive sub-Laplacian -sum_j X_j(X_j f) via nested apply_field.
GridFunction sublaplacian_apply(const GroupSpec& g, const GridFunction& f);

/// Shortest-path estimate of the Carnot-Caratheodory distance on the graph
/// whose edges join nodes reachable by one horizontal step (exact group
/// flow by +-h along each X_j, drift rounded to the nearest node). Edges are
/// symmetrized, so the estimate is a genuine metric on the node set; the
/// rounding bias is O(h^{1/step}).
double cc_distance_estimate(const GroupSpec& g, const Lattice& lat, const Vec& p, const Vec& q);

/// All distances from src at once (same graph as cc_distance_estimate).
Vec cc_distances_from(const GroupSpec& g, const Lattice& lat, const Vec& src);

/// Fit of the equivalence constants between the cc estimate and the gauge:
/// returns (m, M) with m * gauge <= d_cc <= M * gauge over scanned nodes.
std::pair<double, double> fit_gauge_equivalence(const GroupSpec& g, const Lattice& lat);

}  // namespace subfrac

#endif
