#include "pcwlat/special_functions.hpp"

#include <cmath>
#include <stdexcept>

#include "pcwlat/constants.hpp"

namespace pcwlat {

namespace {

constexpr double kSeriesSwitch = 13.0;  // J0/Y0: series below, asymptotic above
constexpr double kK0Switch = 2.0;       // K0: series below, cosh integral above

void require_positive(double x, const char* fn) {
  if (!(x > 0.0)) throw std::domain_error(std::string(fn) + ": requires x > 0");
}

void require_finite(double x, const char* fn) {
  if (!std::isfinite(x)) throw std::domain_error(std::string(fn) + ": requires finite x");
}

// J0 ascending series, long double accumulation
long double j0_series(long double x) {
  const long double q = x * x / 4.0L;
  long double term = 1.0L, sum = 1.0L;
  for (int k = 1; k < 400; ++k) {
    term *= -q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum) + 1e-40L) break;
  }
  return sum;
}

// sum_{k>=1} H_k q^k / (k!)^2 with sign pattern sgn^k, H_k the harmonic numbers
long double harmonic_series(long double x, int sgn) {
  const long double q = x * x / 4.0L;
  long double u = 1.0L, hk = 0.0L, sum = 0.0L;
  for (int k = 1; k < 400; ++k) {
    u *= q / (static_cast<long double>(k) * k);
    hk += 1.0L / k;
    const long double term = (sgn < 0 && (k & 1)) ? -u * hk : u * hk;
    sum += term;
    if (std::fabs(u * hk) < 1e-22L * std::fabs(sum) + 1e-40L) break;
  }
  return sum;
}

long double i0_series(long double x) {
  const long double q = x * x / 4.0L;
  long double term = 1.0L, sum = 1.0L;
  for (int k = 1; k < 400; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    sum += term;
    if (term < 1e-22L * sum) break;
  }
  return sum;
}

// Hankel asymptotic expansion: H0^(1)(x) ~ sqrt(2/pi x) e^{i(x-pi/4)} sum (-i)^k b_k,
// b_k = ((2k-1)!!)^2 / (k! (8x)^k).  Truncated at the smallest term.
void j0y0_asymptotic(double x, double& j0, double& y0) {
  long double b = 1.0L, cr = 1.0L, ci = 0.0L, prev = 1.0L;
  for (int k = 1; k < 60; ++k) {
    const long double f = static_cast<long double>(2 * k - 1);
    b *= f * f / (static_cast<long double>(k) * 8.0L * x);
    if (b > prev) break;  // divergent tail reached
    prev = b;
    switch (k & 3) {  // (-i)^k cycle
      case 1: ci -= b; break;
      case 2: cr -= b; break;
      case 3: ci += b; break;
      default: cr += b; break;
    }
    if (b < 1e-19L) break;
  }
  const long double amp = std::sqrt(2.0L / (constants::pi * static_cast<long double>(x)));
  // chi = x - pi/4 reduced carefully: sin/cos of large args are fine in long double
  const long double chi = static_cast<long double>(x) - constants::pi / 4.0L;
  const long double cc = std::cos(chi), ss = std::sin(chi);
  j0 = static_cast<double>(amp * (cr * cc - ci * ss));
  y0 = static_cast<double>(amp * (cr * ss + ci * cc));
}

// K0(x) = e^{-x} * integral_0^inf exp(-x (cosh t - 1)) dt; the trapezoid rule
// is spectrally accurate here (integrand is even and analytic in a strip).
long double k0_cosh_integral(double x) {
  const long double h = 0.05L;
  const long double tmax = std::acosh(1.0L + 60.0L / x);
  long double sum = 0.5L;  // t = 0 endpoint, integrand = 1
  for (long double t = h; t <= tmax; t += h) {
    sum += std::exp(-static_cast<long double>(x) * (std::cosh(t) - 1.0L));
  }
  return sum * h;
}

}  // namespace

double bessel_j0(double x) {
  require_finite(x, "bessel_j0");
  x = std::fabs(x);
  if (x <= kSeriesSwitch) return static_cast<double>(j0_series(x));
  double j0, y0;
  j0y0_asymptotic(x, j0, y0);
  return j0;
}

double bessel_y0(double x) {
  require_finite(x, "bessel_y0");
  require_positive(x, "bessel_y0");
  if (x <= kSeriesSwitch) {
    // Y0 = (2/pi)[(ln(x/2) + gamma) J0 + sum_k (-1)^{k+1} H_k q^k/(k!)^2]
    const long double lx = std::log(static_cast<long double>(x) / 2.0L) + constants::euler_gamma;
    const long double val =
        (2.0L / constants::pi) * (lx * j0_series(x) - harmonic_series(x, -1));
    return static_cast<double>(val);
  }
  double j0, y0;
  j0y0_asymptotic(x, j0, y0);
  return y0;
}

double bessel_k0(double x) {
  require_finite(x, "bessel_k0");
  require_positive(x, "bessel_k0");
  if (x <= kK0Switch) {
    const long double lx = std::log(static_cast<long double>(x) / 2.0L) + constants::euler_gamma;
    return static_cast<double>(-lx * i0_series(x) + harmonic_series(x, +1));
  }
  return static_cast<double>(std::exp(-static_cast<long double>(x)) * k0_cosh_integral(x));
}

std::complex<double> hankel1_0(double x) {
  require_finite(x, "hankel1_0");
  require_positive(x, "hankel1_0");
  return {bessel_j0(x), bessel_y0(x)};
}

std::complex<double> cyl_bessel(CylKind kind, double x) {
  switch (kind) {
    case CylKind::J0: return {bessel_j0(x), 0.0};
    case CylKind::Y0: return {bessel_y0(x), 0.0};
    case CylKind::K0: return {bessel_k0(x), 0.0};
    case CylKind::H1_0: return hankel1_0(x);
  }
  throw std::invalid_argument("cyl_bessel: unknown kind");
}

double k0_log_asymptote(double x) {
  return -std::log(x / 2.0) - constants::euler_gamma;
}

double k0_exp_asymptote(double x) {
  return std::sqrt(constants::pi / (2.0 * x)) * std::exp(-x);
}

AsymptoteCheck kernel_asymptote_check(double x) {
  require_positive(x, "kernel_asymptote_check");
  if (x < 0.5) return {KernelRegime::logarithmic, bessel_k0(x) / k0_log_asymptote(x)};
  if (x > 5.0) return {KernelRegime::exponential, bessel_k0(x) / k0_exp_asymptote(x)};
  const double asym = (x < 1.0) ? k0_log_asymptote(x) : k0_exp_asymptote(x);
  return {KernelRegime::crossover, bessel_k0(x) / asym};
}

}  // namespace pcwlat
