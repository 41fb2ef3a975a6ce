#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "pcwlat/grids.hpp"
#include "pcwlat/species.hpp"

namespace pcwlat {

// Sign convention: delta > 0 means red detuning and an attractive FORT,
// matching the -Omega^2/delta form of the side-illumination potential.

struct SIBeamParams {
  double Omega_SI = 0;   // Rabi frequency, rad/s (>= 0)
  double lambda_SI = 0;  // m
  double delta_SI = 0;   // detuning from the atomic line, rad/s (!= 0)
  double phi = 0;        // relative phase between up/down beams, rad
  double k_SI = 0;       // 2 pi / lambda_SI, rad/m (derived)
};

SIBeamParams make_si_params(double Omega_SI, double lambda_SI, double delta_SI, double phi = 0);

// Trap minimum position selected by the up/down relative phase.
double si_zt_from_phase(double phi, double k_SI);

enum class GmPattern { incoherent_xy_sum, single_axis };

struct GMLatticeParams {
  double Omega_GM = 0;    // peak Rabi frequency on the trapping plane, rad/s
  double delta = 0;       // detuning, rad/s (!= 0)
  double k_par = 0;       // in-plane wavenumber, rad/m
  double beta_decay = 0;  // evanescent decay constant, rad/m (> 0)
  double z_surface = 0;   // m
  GmPattern pattern = GmPattern::incoherent_xy_sum;
};

GMLatticeParams make_gm_params(double Omega_GM, double delta, double k_par, double beta_decay,
                               double z_surface, GmPattern pattern);

enum class CpVariant { analytic_plane, analytic_hole, ingested_grid };

struct CPModel {
  CpVariant variant = CpVariant::analytic_plane;
  double n = 0;          // substrate index (analytic variants, > 1)
  double z_surface = 0;  // m (analytic variants)
  double R = 0;          // hole radius, m (analytic_hole)
  std::shared_ptr<const Field3> grid;  // sampled V_CP(x,y,z) in J (ingested_grid)
};

struct PcwGeometry {
  double n = 0;       // slab index
  double W = 0;       // slab thickness, m
  double d = 0;       // lattice constant, m
  double R = 0;       // hole/post radius, m
  double h_post = 0;  // post height, m
  // square lattice only
};

struct CpTerm { CPModel model; bool enabled = true; };
struct SiTerm { SIBeamParams params; double z_t = 0; bool enabled = true; };
struct GmTerm { GMLatticeParams params; bool enabled = true; };

struct TrapScene {
  AtomSpecies species;
  PcwGeometry geometry;
  std::vector<CpTerm> cp;
  std::vector<SiTerm> si;
  std::vector<GmTerm> gm;
};

// ---- analytic potential terms (energies in J) ----

// Casimir-Polder above a semi-infinite dielectric plane, z > 0 above the
// surface: -(1/16) (n^2-1)/(n^2+1) hbar Gamma_a / (k_a z)^3.
double cp_plane(const AtomSpecies& species, double n, double z);

// Electrostatic on-axis correction factor above a circular hole of radius R;
// always in (0, 1), exactly 1/2 at z = R.
double cp_hole_factor(double z, double R);

// -(hbar Omega^2/delta) sin^2(k_SI (z - z_t)); zero at z = z_t, period pi/k_SI.
double si_potential(const SIBeamParams& params, double z, double z_t);

// -(hbar |Omega_GM|^2/delta) e^{-2 beta (z - z_surface)} P(x, y), with
// P = [cos^2(k_par x) + cos^2(k_par y)]/2 for the incoherent xy sum
// (normalized so the global maximum of P is 1) and P = cos^2(k_par x) for a
// single axis.  Requires z >= z_surface.
double gm_potential(const GMLatticeParams& params, const Eigen::Vector3d& r);

// Evaluates one CP term of a scene (analytic or ingested grid).
double cp_potential(const CPModel& model, const AtomSpecies& species, const Eigen::Vector3d& r);

// Sum of all enabled terms; exactly linear in the term toggles.
double total_potential(const TrapScene& scene, const Eigen::Vector3d& r);

// ---- stability / feasibility formulas ----

// Minimum SI Rabi frequency Omega_min = sqrt[(3/32) (n^2-1)/(n^2+1)
// delta_SI Gamma_a / ((k_a z_t)^3 (k_SI z_t)^2)], rad/s.  delta_SI is the
// detuning magnitude (> 0).
double stability_intensity_bound(const AtomSpecies& species, double n, double z_t,
                                 double delta_SI, double k_SI);

// (max - min)/(max + min) of nonnegative |E|^2 samples on a plane.
double contrast(const Eigen::ArrayXXd& intensity_plane);

// Rabi frequency meeting the trapping condition 2 omega_t = V_d at contrast C:
// sqrt(2 h c |dlambda_inv| / (m d^2 C)), rad/s.
double omega_conf(const AtomSpecies& species, double d, double C, double delta_lambda_inv);

// (V/hbar) Gamma_a / |delta|, rad/s.
double scattering_rate(double trap_depth, double delta, const AtomSpecies& species);

// 2 pi n2 I W / lambda, radians accumulated across a thickness W.
double nonlinear_phase(double n2, double intensity, double W_thick, double lambda);

}  // namespace pcwlat
