#include "subfrac/spectral.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace subfrac {

DiscreteOperator assemble_sublaplacian(const GroupSpec& g, const Lattice& lat) {
  if (lat.dim() != g.dim()) throw std::invalid_argument("assemble_sublaplacian: dimension mismatch");
  if (lat.size() == 0) throw std::invalid_argument("assemble_sublaplacian: empty lattice");
  if (!lat.group_compatible(g))
    throw std::invalid_argument("assemble_sublaplacian: lattice is not group-compatible");
  const std::int64_t n = lat.size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (2 * g.horizontal_dim() + 1));
  Vec e = Vec::Zero(g.dim());
  for (std::int64_t f = 0; f < n; ++f) {
    const IVec idx = lat.unflat(f);
    const Vec x = lat.point(idx);
    double diag = 0.0;
    for (int j = 0; j < g.horizontal_dim(); ++j) {
      const double h = lat.spacing(j);
      const double w = 1.0 / (h * h);
      diag += 2.0 * w;
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        e.setZero();
        e[j] = sgn * h;
        IVec tgt;
        const Vec y = mult(g, x, e);
        if (!lat.nearest(y, &tgt)) continue;  // zero exterior condition
        if ((lat.point(tgt) - y).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + y.cwiseAbs().maxCoeff()))
          throw std::invalid_argument("assemble_sublaplacian: flow left the lattice pattern");
        trip.emplace_back(static_cast<int>(f), static_cast<int>(lat.flat(tgt)), -w);
      }
    }
    trip.emplace_back(static_cast<int>(f), static_cast<int>(f), diag);
  }
  DiscreteOperator op;
  op.group = g;
  op.lattice = lat;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> skew = Eigen::SparseMatrix<double>(op.matrix.transpose()) - op.matrix;
  const double a = skew.coeffs().size() ? skew.coeffs().cwiseAbs().maxCoeff() : 0.0;
  op.asymmetry_norm = a;
  if (a > 0.0) {
    Eigen::SparseMatrix<double> sym =
        0.5 * (op.matrix + Eigen::SparseMatrix<double>(op.matrix.transpose()));
    op.matrix.swap(sym);
  }
  return op;
}

SpectralDecomposition eigendecompose(const DiscreteOperator& op) {
  const std::int64_t n = op.matrix.rows();
  if (n > 9000)
    throw std::invalid_argument("eigendecompose: dense path limited to 9000 nodes; use the "
                                "Chebyshev applicator for larger boxes");
  Eigen::MatrixXd dense(op.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecompose: failed to converge");
  SpectralDecomposition S;
  S.lattice = op.lattice;
  S.eigenvalues = es.eigenvalues();
  S.vectors = es.eigenvectors();
  for (std::int64_t i = 0; i < n; ++i) S.eigenvalues[i] = std::max(S.eigenvalues[i], 0.0);
  return S;
}

GridFunction apply_spectral_function(const SpectralDecomposition& S,
                                     const std::function<double(double)>& f,
                                     const GridFunction& u) {
  if (!u.lattice.same_as(S.lattice))
    throw std::invalid_argument("apply_spectral_function: lattice mismatch");
  Vec c = S.vectors.transpose() * u.values;
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= f(S.eigenvalues[i]);
  GridFunction out(u.lattice, u.margin);
  out.values = S.vectors * c;
  return out;
}

GridFunction apply_fractional_spectral(const SpectralDecomposition& S, double s,
                                       const GridFunction& u) {
  if (s < 0.0 && S.eigenvalues[0] <= 0.0)
    throw std::invalid_argument("apply_fractional_spectral: negative power with a zero mode");
  return apply_spectral_function(
      S, [s](double lam) { return lam <= 0.0 ? (s == 0.0 ? 1.0 : 0.0) : std::pow(lam, s); }, u);
}

GridFunction resolvent(const SpectralDecomposition& S, double eta, const GridFunction& u) {
  if (!(eta > 0.0)) throw std::invalid_argument("resolvent: eta must be > 0");
  return apply_spectral_function(S, [eta](double lam) { return 1.0 / (1.0 + eta * lam); }, u);
}

double sobolev_norm(const SpectralDecomposition& S, double s, const GridFunction& u) {
  const double vol = u.lattice.cell_volume();
  Vec c = S.vectors.transpose() * u.values;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double lam = S.eigenvalues[i];
    const double w = lam <= 0.0 ? (s == 0.0 ? 1.0 : 0.0) : std::pow(lam, s);
    acc += w * c[i] * c[i];
  }
  return std::sqrt(vol * (c.squaredNorm() + acc));
}

namespace {

double gershgorin_upper(const Eigen::SparseMatrix<double>& A) {
  Vec row = Vec::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      row[it.row()] += std::abs(it.value());
  return row.maxCoeff();
}

double smallest_eigenvalue(const Eigen::SparseMatrix<double>& A) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(A);
  if (chol.info() != Eigen::Success)
    throw std::runtime_error("ChebyshevApplicator: factorization failed");
  Vec x = Vec::Ones(A.rows());
  x.normalize();
  double mu = 0.0;
  for (int it = 0; it < 60; ++it) {
    Vec y = chol.solve(x);
    y.normalize();
    const double next = y.dot(A * y);
    if (it > 5 && std::abs(next - mu) < 1e-10 * next) { mu = next; break; }
    mu = next;
    x = y;
  }
  return mu;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

ChebyshevApplicator::ChebyshevApplicator(const DiscreteOperator& op, double tol)
    : op_(op), tol_(tol) {
  lam_hi_ = gershgorin_upper(op.matrix) * (1.0 + 1e-12);
  lam_lo_ = 0.98 * smallest_eigenvalue(op.matrix);
  if (!(lam_lo_ > 0.0)) lam_lo_ = 0.0;
}

GridFunction ChebyshevApplicator::apply(const std::function<double(double)>& f,
                                        const GridFunction& u) const {
  if (!u.lattice.same_as(op_.lattice))
    throw std::invalid_argument("ChebyshevApplicator: lattice mismatch");
  const double a = lam_lo_, b = lam_hi_;
  auto fc = [&](double lam) { return f(std::min(std::max(lam, a), b)); };

  int m = 64;
  std::vector<double> coef;
  for (;;) {
    coef.assign(m + 1, 0.0);
    std::vector<double> fx(m + 1);
    for (int j = 0; j <= m; ++j) {
      const double theta = kPi * (j + 0.5) / (m + 1);
      fx[j] = fc(0.5 * (a + b) + 0.5 * (b - a) * std::cos(theta));
    }
    for (int k = 0; k <= m; ++k) {
      double s = 0.0;
      for (int j = 0; j <= m; ++j) s += fx[j] * std::cos(kPi * k * (j + 0.5) / (m + 1));
      coef[k] = 2.0 / (m + 1) * s;
    }
    double err = 0.0;
    for (int j = 0; j <= 4 * m; ++j) {
      const double x = -1.0 + 2.0 * j / (4.0 * m);
      double t0 = 1.0, t1 = x, acc = 0.5 * coef[0] + coef[1] * x;
      for (int k = 2; k <= m; ++k) {
        const double t2 = 2.0 * x * t1 - t0;
        acc += coef[k] * t2;
        t0 = t1;
        t1 = t2;
      }
      err = std::max(err, std::abs(acc - fc(0.5 * (a + b) + 0.5 * (b - a) * x)));
    }
    if (err <= tol_ || m >= 4096) break;
    m *= 2;
  }

  const double alpha = 2.0 / (b - a), beta = -(a + b) / (b - a);
  auto amap = [&](const Vec& v) { return (alpha * (op_.matrix * v) + beta * v).eval(); };
  Vec t0 = u.values;
  Vec t1 = amap(t0);
  Vec acc = 0.5 * coef[0] * t0 + coef[1] * t1;
  for (int k = 2; k <= m; ++k) {
    Vec t2 = 2.0 * amap(t1) - t0;
    acc += coef[k] * t2;
    t0.swap(t1);
    t1.swap(t2);
  }
  GridFunction out(u.lattice, u.margin);
  out.values = acc;
  return out;
}

}  // namespace subfrac
