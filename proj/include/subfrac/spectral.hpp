#ifndef SUBFRAC_SPECTRAL_HPP
#define SUBFRAC_SPECTRAL_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>

#include "subfrac/carnot.hpp"

namespace subfrac {

/// Matrix form of the positive sub-Laplacian on a lattice box with zero
/// exterior condition. Each -X_j^2 is discretized by the second difference
/// along the exact group flow x -> x * (+-h e_j); on a group-compatible
/// lattice the flowed neighbor is again a node and the coupling is mutual,
/// so the raw assembly is symmetric (the reported asymmetry norm is zero)
/// and positive semidefinite by construction.
struct DiscreteOperator {
  GroupSpec group;
  Lattice lattice;
  Eigen::SparseMatrix<double> matrix;  // over all lattice nodes
  double asymmetry_norm = 0.0;
};

DiscreteOperator assemble_sublaplacian(const GroupSpec& g, const Lattice& lat);

struct SpectralDecomposition {
  Lattice lattice;
  Vec eigenvalues;          // ascending, >= 0
  Eigen::MatrixXd vectors;  // orthonormal columns (unit l2)
};

/// Dense eigendecomposition; intended for boxes up to a few thousand nodes.
SpectralDecomposition eigendecompose(const DiscreteOperator& op);

/// sum_i f(lambda_i) <u, e_i> e_i
GridFunction apply_spectral_function(const SpectralDecomposition& S,
                                     const std::function<double(double)>& f,
                                     const GridFunction& u);

/// L^s u by the eigen-sum; s >= 0, or s < 0 when no eigenvalue vanishes.
GridFunction apply_fractional_spectral(const SpectralDecomposition& S, double s,
                                       const GridFunction& u);

/// (1 + eta L)^{-1} u; an l2 contraction for eta > 0.
GridFunction resolvent(const SpectralDecomposition& S, double eta, const GridFunction& u);

/// Graph norm (||u||^2 + ||L^{s/2} u||^2)^{1/2} with volume-weighted norms.
double sobolev_norm(const SpectralDecomposition& S, double s, const GridFunction& u);

/// Chebyshev realization of f(L) u for boxes too large to eigendecompose:
/// approximates f on [lambda_lo, lambda_hi] (spectrum bounds from inverse
/// iteration and Gershgorin) and applies the polynomial through sparse
/// matvecs. Matches the eigen-sum to the requested tolerance.
class ChebyshevApplicator {
 public:
  explicit ChebyshevApplicator(const DiscreteOperator& op, double tol = 1e-7);

  double lambda_min() const { return lam_lo_; }
  double lambda_max() const { return lam_hi_; }

  GridFunction apply(const std::function<double(double)>& f, const GridFunction& u) const;

 private:
  const DiscreteOperator& op_;
  double tol_;
  double lam_lo_ = 0.0, lam_hi_ = 1.0;
};

}  // namespace subfrac

#endif
