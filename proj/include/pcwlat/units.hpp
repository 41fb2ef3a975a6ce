#pragma once

#include "pcwlat/constants.hpp"

// All rates and detunings (Gamma, kappa, Omega, Delta, J, delta) are stored
// internally as angular frequencies in rad/s.  Every file/report surface
// divides by 2pi; config keys carry an explicit _over_2pi_Hz suffix.
namespace pcwlat {

inline double to_ordinary_hz(double omega_rad_per_s) {
  return omega_rad_per_s / constants::two_pi;
}

inline double to_angular(double nu_hz) { return nu_hz * constants::two_pi; }

// E/h in Hz for an energy in J
inline double energy_over_h(double energy_j) { return energy_j / constants::h; }

}  // namespace pcwlat
