#include "subfrac/special.hpp"

#include <cmath>
#include <stdexcept>

namespace subfrac {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Lanczos, g = 7, 9 coefficients; ~1e-14 relative on the range used here
// (all Gamma arguments in this library lie in (-1, 3/2]).
double lanczos_gamma(double x) {
  static const double c[9] = {
      0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,    12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6,  1.5056327351493116e-7};
  x -= 1.0;
  double a = c[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
  return std::sqrt(2.0 * kPi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

}  // namespace

double gamma_fn(double x) {
  if (x == std::floor(x) && x <= 0.0) throw std::invalid_argument("gamma_fn: nonpositive integer");
  if (x < 0.5) return kPi / (std::sin(kPi * x) * lanczos_gamma(1.0 - x));
  return lanczos_gamma(x);
}

FractionalParams params_from_a(double a) {
  if (!(a > -1.0 && a < 1.0)) throw std::invalid_argument("params_from_a: a must lie in (-1,1)");
  FractionalParams p;
  p.a = a;
  p.alpha = -2.0 * a / (1.0 - a);
  p.k = 0.5 * (2.0 - p.alpha);  // = 1/(1-a)
  p.theta = std::pow(1.0 - a, a - 1.0);
  const double nu = 0.5 / p.k;
  p.c_alpha = std::pow(2.0, 1.0 - nu) / gamma_fn(nu) * std::pow(p.k, -nu);
  p.C_a = std::pow(2.0, a - 1.0) / gamma_fn(0.5 * (1.0 - a));
  return p;
}

double bessel_k_scaled(double nu, double z) {
  if (!(z > 0.0)) throw std::invalid_argument("bessel_k: z must be > 0");
  nu = std::abs(nu);
  // integrand f(s) = cosh(nu s) exp(-z (cosh s - 1)), even and analytic;
  // trapezoid sums converge geometrically under step halving.
  double smax = 1.0;
  while (z * (std::cosh(smax) - 1.0) - nu * smax < 60.0 && smax < 80.0) smax += 0.5;
  auto f = [&](double s) {
    const double e = z * (std::cosh(s) - 1.0) - std::log(std::cosh(nu * s));
    return e > 700.0 ? 0.0 : std::cosh(nu * s) * std::exp(-z * (std::cosh(s) - 1.0));
  };
  double h = smax / 16.0;
  double sum = 0.5 * f(0.0);
  for (int i = 1; i * h <= smax; ++i) sum += f(i * h);
  double prev = sum * h;
  for (int level = 0; level < 12; ++level) {
    double add = 0.0;
    const double h2 = 0.5 * h;
    for (double s = h2; s <= smax; s += h) add += f(s);
    const double cur = 0.5 * prev + h2 * add;
    if (std::abs(cur - prev) <= 1e-14 * std::abs(cur) && level >= 2) return cur;
    prev = cur;
    h = h2;
  }
  return prev;
}

double bessel_k(double nu, double z) {
  const double s = bessel_k_scaled(nu, z);
  return z > 700.0 ? 0.0 : s * std::exp(-z);
}

namespace {

// K_nu(z) ~ (1/2) Gamma(nu) (z/2)^{-nu} + (1/2) Gamma(-nu) (z/2)^{nu} for
// z -> 0 and 0 < nu < 1; feeding t^k/k gives
//   phi(t)  = 1 + phi'(0) t + t^{2k}/((2k-1)2k) + ...
//   phi'(t) = phi'(0) + t^{2k-1}/(2k-1) + ...
// (the t^{2k} coefficient follows from the ODE phi'' = t^{alpha} ... phi).
double small_t_threshold(const FractionalParams& p) { return std::pow(1e-8, 1.0 / p.k); }

}  // namespace

double phi_prime_at_zero(const FractionalParams& p) {
  const double nu = 0.5 / p.k;
  return 0.5 * p.c_alpha * gamma_fn(-nu) * std::pow(2.0 * p.k, -nu);
}

double phi(const FractionalParams& p, double t) {
  if (t < 0.0) throw std::invalid_argument("phi: t must be >= 0");
  if (t == 0.0) return 1.0;
  if (t < small_t_threshold(p))
    return 1.0 + phi_prime_at_zero(p) * t + std::pow(t, 2.0 * p.k) / ((2.0 * p.k - 1.0) * 2.0 * p.k);
  const double z = std::pow(t, p.k) / p.k;
  const double nu = 0.5 / p.k;
  const double logv = std::log(p.c_alpha) + 0.5 * std::log(t) + std::log(bessel_k_scaled(nu, z)) - z;
  return logv < -740.0 ? 0.0 : std::exp(logv);
}

double phi_scaled(const FractionalParams& p, double t) {
  if (t < 0.0) throw std::invalid_argument("phi_scaled: t must be >= 0");
  if (t == 0.0) return 1.0;
  if (t < small_t_threshold(p)) return phi(p, t) * std::exp(std::pow(t, p.k) / p.k);
  const double z = std::pow(t, p.k) / p.k;
  return p.c_alpha * std::sqrt(t) * bessel_k_scaled(0.5 / p.k, z);
}

double phi_prime(const FractionalParams& p, double t) {
  if (t < 0.0) throw std::invalid_argument("phi_prime: t must be >= 0");
  if (t < small_t_threshold(p)) {
    double v = phi_prime_at_zero(p);
    if (t > 0.0) v += std::pow(t, 1.0 - p.alpha) / (1.0 - p.alpha);
    return v;
  }
  const double z = std::pow(t, p.k) / p.k;
  const double nu = 0.5 / p.k;
  const double ks = bessel_k_scaled(nu, z);
  const double kps = -0.5 * (bessel_k_scaled(nu - 1.0, z) + bessel_k_scaled(nu + 1.0, z));
  // d/dt [c t^{1/2} K_nu(z(t))], z'(t) = t^{k-1}
  const double scaled = p.c_alpha * (0.5 / std::sqrt(t) * ks + std::sqrt(t) * std::pow(t, p.k - 1.0) * kps);
  return z > 700.0 ? 0.0 : scaled * std::exp(-z);
}

}  // namespace subfrac
