#ifndef SUBFRAC_SPECIAL_HPP
#define SUBFRAC_SPECIAL_HPP

namespace subfrac {

/// Constant pack tying the extension parameter a in (-1,1) to the Bessel
/// profile phi: alpha = -2a/(1-a), k = (2-alpha)/2 = 1/(1-a),
/// theta = (1-a)^{a-1}, c_alpha = 2^{1-1/2k} Gamma(1/2k)^{-1} k^{-1/2k},
/// C_a = 2^{a-1}/Gamma((1-a)/2) = 2^{(a-3)/2} c_alpha theta^{1/2}.
struct FractionalParams {
  double a;
  double alpha;
  double k;
  double theta;
  double c_alpha;
  double C_a;
};

FractionalParams params_from_a(double a);

/// Real Gamma function, Lanczos approximation with reflection for x < 1/2.
double gamma_fn(double x);

/// Modified Bessel function of the second kind via the real integral
/// K_nu(z) = 1/2 int_0^inf xi^{-nu-1} exp(-z(xi + 1/xi)/2) dxi
///         = int_0^inf cosh(nu s) exp(-z cosh s) ds,
/// evaluated by step-halving trapezoid sums on the even integrand (the
/// xi -> 1/xi symmetry makes the sign of nu irrelevant). Relative error
/// well below 1e-10 for z in the range used here.
double bessel_k(double nu, double z);

/// e^z K_nu(z); safe against underflow for large z.
double bessel_k_scaled(double nu, double z);

/// Profile phi(t) = c_alpha t^{1/2} K_{1/2k}(t^k / k): the bounded solution
/// of -t^alpha phi'' + phi = 0 with phi(0) = 1, phi(inf) = 0. For t^k below
/// 1e-8 the small-argument series is used (documented switch).
double phi(const FractionalParams& p, double t);

/// phi(t) * exp(t^k / k); stays representable far into the decay regime.
double phi_scaled(const FractionalParams& p, double t);

/// phi'(t), differentiated under the Bessel integral through the recurrence
/// K_nu' = -(K_{nu-1} + K_{nu+1})/2; near t = 0 the series limit is used.
double phi_prime(const FractionalParams& p, double t);

/// Finite limit of phi' at 0 (negative).
double phi_prime_at_zero(const FractionalParams& p);

}  // namespace subfrac

#endif
