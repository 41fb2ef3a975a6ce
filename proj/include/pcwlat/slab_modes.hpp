#pragma once

#include <vector>

namespace pcwlat {

struct SlabGeometry {
  double n = 1.0;  // refractive index, > 1
  double W = 0.0;  // thickness, m
};

// One symmetric TE branch of the uniform slab.  The transverse wavenumber
// k_z and the outside decay constant beta satisfy
//   beta = k_z tan(k_z W/2),   k_z^2 + beta^2 = k0^2 (n^2 - 1),
// and k_par^2 = k0^2 n^2 - k_z^2.  Field amplitudes are stored with the
// outside coordinate measured from the slab mid-plane, so continuity reads
// E_in cos(k_z W/2) = E_out e^{-beta W/2}.
struct SlabMode {
  double k_z = 0;     // rad/m
  double beta = 0;    // rad/m
  double k_par = 0;   // rad/m
  double E_in = 1.0;  // relative amplitude inside
  double E_out = 0;   // relative amplitude outside
  int branch_index = 0;
};

// All symmetric TE branches (k_z W/2 in [m pi, m pi + pi/2)), sorted by
// k_par descending.  Bisection on the bracketed tan-equation, relative
// tolerance 1e-14.  The fundamental branch always exists for n > 1.
std::vector<SlabMode> solve_te_modes(const SlabGeometry& slab, double lambda0);

// lambda0 / (2 n): the thick-slab bound on the standing-wave period.
double min_lattice_constant(double n, double lambda0);

// pi / k_par of a solved mode
double standing_wave_period(const SlabMode& mode);

}  // namespace pcwlat
