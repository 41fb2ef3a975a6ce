#pragma once

#include <complex>

// Cylinder Bessel functions of order zero, implemented in-repo so the
// interaction kernels behave identically across ports.  Ascending series in
// long double for small arguments; Hankel asymptotic expansion (J0/Y0) and
// an exponentially scaled cosh-integral (K0) beyond.  Relative accuracy is
// better than 1e-10 over (0, 50] away from zeros of the oscillatory pair.
namespace pcwlat {

double bessel_j0(double x);

// x > 0 required (logarithmic singularity at the origin)
double bessel_y0(double x);
double bessel_k0(double x);

// H^(1)_0(x) = J0(x) + i Y0(x), x > 0
std::complex<double> hankel1_0(double x);

enum class CylKind { J0, Y0, K0, H1_0 };
std::complex<double> cyl_bessel(CylKind kind, double x);

// K0 asymptotes used by the kernel regime check
double k0_log_asymptote(double x);    // -ln(x/2) - gamma_E, x << 1
double k0_exp_asymptote(double x);    // sqrt(pi/2x) e^{-x},  x >> 1

enum class KernelRegime { logarithmic, crossover, exponential };

struct AsymptoteCheck {
  KernelRegime regime;
  double ratio;  // K0(x) / asymptote of the active regime (nearest one in crossover)
};

// Which K0 asymptotic regime applies at x, and how close K0 is to it.
AsymptoteCheck kernel_asymptote_check(double x);

}  // namespace pcwlat
