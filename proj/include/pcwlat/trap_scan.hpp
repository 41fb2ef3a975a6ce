#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "pcwlat/grids.hpp"
#include "pcwlat/potentials.hpp"

namespace pcwlat {

using PotentialFn = std::function<double(const Eigen::Vector3d&)>;

struct PotentialField {
  Field3 field;                 // energy samples in J on monotone axes
  std::uint64_t scene_hash = 0; // provenance tag
};

struct TrapSite {
  Eigen::Vector3d position;        // m
  Eigen::Vector3d depth_per_axis;  // J, barrier to nearest saddle along each principal axis
  Eigen::Vector3d frequencies;     // rad/s, sqrt(eigenvalue/mass)
  Eigen::Matrix3d hessian;         // J/m^2, symmetric positive definite at a minimum
  double value = 0;                // potential at the minimum, J
};

struct HubbardScales {
  double E_R = 0;       // recoil energy, J
  double s = 0;         // depth in recoils
  double J_tunnel = 0;  // tight-binding tunneling estimate, J
  double nu_t = 0;      // sinusoidal-lattice trap frequency, Hz
};

// Samples fn on the tensor grid; values[i,j,k] = fn(r_ijk) exactly and
// independent of evaluation order.
PotentialField evaluate_grid(const PotentialFn& fn, const Eigen::ArrayXd& x,
                             const Eigen::ArrayXd& y, const Eigen::ArrayXd& z,
                             std::uint64_t scene_hash = 0);
PotentialField evaluate_grid(const TrapScene& scene, const Eigen::ArrayXd& x,
                             const Eigen::ArrayXd& y, const Eigen::ArrayXd& z,
                             std::uint64_t scene_hash = 0);

// Strict local minima over the 26-neighborhood, refined by per-axis quadratic
// interpolation, sorted deepest first.  Needs >= 3 points per axis.  An empty
// result is valid (no minima).
std::vector<Eigen::Vector3d> find_minima(const PotentialField& field);

struct CharacterizeParams {
  // finite-difference step is 1e-3 * fd_scale (Richardson-extrapolated order 2)
  double fd_scale = 1e-9;
  // half-length and sampling of the principal-axis line scans for barrier depths
  Eigen::Vector3d scan_extent = Eigen::Vector3d::Zero();
  int scan_points = 400;
};

// Hessian, frequencies and per-axis barrier depths at a local minimum of V.
// Throws std::domain_error if the Hessian is not positive definite there.
TrapSite characterize(const PotentialFn& V, double mass, const Eigen::Vector3d& position,
                      const CharacterizeParams& params);
TrapSite characterize(const TrapScene& scene, const Eigen::Vector3d& position,
                      const CharacterizeParams& params);

// E_R = h^2 / (8 m d^2)
double recoil_energy(const AtomSpecies& species, double d);

// s = V_d / E_R
double depth_in_recoils(double V_d, const AtomSpecies& species, double d);

struct TunnelingEstimate {
  double J = 0;                 // J (energy)
  bool below_validity = false;  // s < 1: asymptotic form not trustworthy
};

// 1-D tight-binding asymptotic J = (4/sqrt(pi)) E_R s^{3/4} e^{-2 sqrt(s)}.
TunnelingEstimate tunneling_estimate(double s, const AtomSpecies& species, double d);

// Convenience bundle for the lattice scale chain at depth V_d.
HubbardScales hubbard_scales(const AtomSpecies& species, double d, double V_d);

}  // namespace pcwlat
