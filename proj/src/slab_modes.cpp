#include "pcwlat/slab_modes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pcwlat/constants.hpp"

namespace pcwlat {

namespace {

// Residual of the transcendental pair on branch m, in the scaled variable
// u = k_z W/2.  The circle condition is folded in: v = beta W/2 =
// sqrt(R^2 - u^2), so a root of f(u) = u tan(u) - v solves both equations.
double branch_residual(double u, double R) {
  const double v2 = R * R - u * u;
  const double v = v2 > 0 ? std::sqrt(v2) : 0.0;
  return u * std::tan(u) - v;
}

}  // namespace

std::vector<SlabMode> solve_te_modes(const SlabGeometry& slab, double lambda0) {
  if (!(slab.n > 1.0)) throw std::invalid_argument("solve_te_modes: requires n > 1");
  if (!(slab.W > 0.0)) throw std::invalid_argument("solve_te_modes: requires W > 0");
  if (!(lambda0 > 0.0)) throw std::invalid_argument("solve_te_modes: requires lambda0 > 0");

  const double k0 = constants::two_pi / lambda0;
  const double R = 0.5 * k0 * slab.W * std::sqrt(slab.n * slab.n - 1.0);

  std::vector<SlabMode> modes;
  for (int m = 0; m * constants::pi < R; ++m) {
    // bracket inside [m pi, m pi + pi/2); f goes from -sqrt(R^2-u^2) to +inf
    double a = m * constants::pi;
    double b = std::min(a + constants::pi / 2.0, R);
    double fa = branch_residual(a + 1e-300, R);
    if (fa > 0) continue;  // degenerate sliver, no root
    // shrink b until f(b) is finite and positive
    double fb = branch_residual(b * (1.0 - 1e-15), R);
    while (!(fb > 0) && b - a > 1e-16) {
      b = a + (b - a) * 0.999999;
      fb = branch_residual(b, R);
    }
    if (!(fb > 0)) continue;
    for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, b); ++it) {
      const double mid = 0.5 * (a + b);
      if (branch_residual(mid, R) > 0)
        b = mid;
      else
        a = mid;
    }
    const double u = 0.5 * (a + b);

    SlabMode mode;
    mode.branch_index = m;
    mode.k_z = 2.0 * u / slab.W;
    // beta from the circle condition keeps k_z^2 + beta^2 = k0^2 (n^2-1) exact
    mode.beta = std::sqrt(std::max(0.0, k0 * k0 * (slab.n * slab.n - 1.0) - mode.k_z * mode.k_z));
    mode.k_par = std::sqrt(k0 * k0 * slab.n * slab.n - mode.k_z * mode.k_z);
    mode.E_in = 1.0;
    mode.E_out = std::cos(u) * std::exp(mode.beta * slab.W / 2.0);
    modes.push_back(mode);
  }

  std::sort(modes.begin(), modes.end(),
            [](const SlabMode& x, const SlabMode& y) { return x.k_par > y.k_par; });
  return modes;
}

double min_lattice_constant(double n, double lambda0) {
  if (!(n >= 1.0)) throw std::invalid_argument("min_lattice_constant: requires n >= 1");
  if (!(lambda0 > 0.0)) throw std::invalid_argument("min_lattice_constant: requires lambda0 > 0");
  return lambda0 / (2.0 * n);
}

double standing_wave_period(const SlabMode& mode) {
  if (!(mode.k_par > 0.0)) throw std::invalid_argument("standing_wave_period: invalid mode");
  return constants::pi / mode.k_par;
}

}  // namespace pcwlat
