#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "pcwlat/grids.hpp"
#include "pcwlat/species.hpp"

namespace pcwlat {

// Parabolic band-edge parameters near an X point.  A multiplies k^2 and is
// an angular-frequency curvature (rad m^2/s): omega(k) ~ omega_c + A k^2.
struct BandPatch {
  double omega_c = 0;  // band-edge angular frequency, rad/s
  double k_c = 0;      // X-point wavevector magnitude, rad/m (pi/d)
  double A = 0;        // band curvature, m^2 rad/s (nonzero)
  double L_m = 0;      // effective mode length at the atom position, m
  double d = 0;        // lattice constant, m
};

BandPatch make_band_patch(double omega_c, double A, double L_m, double d);

// Sampled anisotropic dispersion and mode-length data on one Brillouin-zone
// quadrant around the X point.  kx runs toward Gamma, ky toward M, both
// measured from the X point on uniform ascending axes starting at 0.
struct BandGrid {
  Eigen::ArrayXd kx, ky;   // rad/m
  Eigen::ArrayXXd omega;   // rad/s, omega(i, j) at (kx[i], ky[j])
  Eigen::ArrayXXd L_m;     // m
  double d = 0;            // lattice constant, m
  std::string r_a_tag;     // atom position tag

  void validate() const;   // monotone uniform axes, finite omega, L_m > 0
  double spacing() const;  // uniform grid step, rad/m
};

enum class CouplingRegime { bandgap, dispersive };

struct KernelParams {
  double Gamma_2d = 0;  // coupling scale, rad/s
  double xi = 0;        // interaction length sqrt(|A/Delta|), m
  CouplingRegime regime = CouplingRegime::bandgap;
  double Delta = 0;     // effective detuning, rad/s (signed; < 0 in the bandgap)
  double k_cutoff = 0;  // radial BZ cutoff pi/d, rad/m
};

// Delta < 0 selects the bandgap regime, Delta > 0 the dispersive one.
KernelParams make_kernel_params(const AtomSpecies& species, const BandPatch& patch, double Delta);

// Same-axes pair of sampled eps(r) and |E(r)|^2 over one unit cell and the
// vertical extent of the mode.
struct FieldDensity {
  Field3 eps;
  Field3 E2;
};

// L_m = integral eps |E|^2 d^3r / (d^2 eps(r_a) |E(r_a)|^2), trapezoidal in
// each axis.  Throws std::domain_error when the field vanishes at the atom.
double effective_mode_length(const FieldDensity& field, const Eigen::Vector3d& r_a, double d);

enum class FitDirection { x_to_m, x_to_gamma };

struct CurvatureFit {
  double A = 0;            // m^2 rad/s
  double omega_c_fit = 0;  // rad/s
  double rms_residual = 0; // rad/s
  bool quality_warning = false;  // residual too large for a parabola
};

// Least-squares parabola omega ~ omega_c + A k^2 along one grid direction,
// over samples with k <= k_window (0 selects a quarter of the axis range).
// Needs at least 5 samples inside the window.
CurvatureFit fit_curvature(const BandGrid& grid, FitDirection direction, double k_window = 0);

// The isotropic-fit variant: the single A that makes the closed-form kernel
// Gamma_2d(A) K0(|r|/xi(A, Delta)) track the quadrant quadrature over the
// given detunings below the band edge (golden-section on log A).
CurvatureFit fit_curvature_isotropic(const BandGrid& grid, const AtomSpecies& species,
                                     const Eigen::ArrayXd& deltas_below_edge,
                                     const Eigen::Vector2d& r_ij);

// Gamma_2d = Gamma_a c sigma / (4 pi A L_m), sigma = (3/2pi) eta lambda_a^2.
double gamma_2d(const AtomSpecies& species, const BandPatch& patch);

// xi = sqrt(|A/Delta|); Delta = 0 diverges.
double interaction_length(double A, double Delta);

// Bandgap kernel J(r) = Gamma_2d K0(r/xi); the h_beta factor is applied by
// the Raman reduction.  r = 0 is the on-site shift, not this kernel.
double kernel_bandgap(const KernelParams& params, double r);

// Dispersive kernel Gamma_ij = (pi/2) Gamma_2d H1_0(r/xi); real part is
// gamma_ij/2, imaginary part is J_ij.
std::complex<double> kernel_dispersive(const KernelParams& params, double r);

// On-site limit of the radial bandgap integral with BZ cutoff:
// Gamma_2d * (1/2) ln(1 + (k_cutoff xi)^2).
double onsite_shift(const KernelParams& params);

struct XPointPhase {
  double phase_x = 1;  // cos(k_c . r) for the x X-point: (-1)^n on lattice vectors
  double phase_y = 1;  // (-1)^m for the y X-point
  bool fractional_warning = false;  // r_ij was not an integer lattice vector
};

XPointPhase xpoint_phase(double k_c, const Eigen::Vector2d& r_ij, double d);

struct BzQuadratureOptions {
  // local parabolic refinement of the k ~ 0 peak (active when xi > 10 d)
  bool allow_refinement = true;
  int refine_subdiv = 128;         // fine Simpson intervals per axis in the block
  double refine_radius_xi = 12.0;  // block half-width in units of 1/xi
};

// J_ij = 8 * integral over the quadrant of d^2k/(2pi)^2 *
//        |g(k)|^2 L^2 / (omega(k) - omega_a) * cos(kx rx) cos(ky ry),
// with |g|^2 L^2 = Gamma_a c sigma omega(k) / (4 L_m(k) omega_a).  Composite
// 2-D Simpson on the stored grid; deterministic.  omega_a must lie below the
// band (bandgap regime), otherwise a wrong-regime error points to the
// dispersive path.
double bz_integrate_bandgap(const BandGrid& grid, const AtomSpecies& species, double omega_a,
                            const Eigen::Vector2d& r_ij, const BzQuadratureOptions& options = {});

// Experimental: dispersive-regime quadrature via a finite-s sequence
// s, s/2, s/4 with quadratic Richardson extrapolation to s -> 0.
std::complex<double> bz_integrate_dispersive(const BandGrid& grid, const AtomSpecies& species,
                                             double omega_a, const Eigen::Vector2d& r_ij);

}  // namespace pcwlat
