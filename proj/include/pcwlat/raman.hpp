#pragma once

#include <Eigen/Dense>

#include "pcwlat/band_coupling.hpp"
#include "pcwlat/species.hpp"

namespace pcwlat {

// Two ground states g1, g2 and excited state e driven by two off-resonant
// lasers; reduces to an effective spin coupled to the guided modes.
// Single-photon detunings Delta_l = omega_e - (omega_g_l + omega_L_l) are
// derived on construction.  Adiabaticity |Delta_l| >> Omega_l is policed:
// ratio < 3 is an error, < 10 sets a warning flag.
struct LambdaScheme {
  double Omega_1 = 0, Omega_2 = 0;      // drive Rabi frequencies, rad/s
  double omega_L1 = 0, omega_L2 = 0;    // laser frequencies, rad/s
  double omega_g1 = 0, omega_g2 = 0;    // ground-level frequencies, rad/s
  double omega_e = 0;                   // excited-level frequency, rad/s
  double omega_c = 0;                   // band-edge frequency, rad/s
  double Delta_1 = 0, Delta_2 = 0;      // derived, rad/s
  bool adiabaticity_warning = false;
};

LambdaScheme make_lambda_scheme(double Omega_1, double Omega_2, double omega_L1, double omega_L2,
                                double omega_g1, double omega_g2, double omega_e, double omega_c);

// Ground-state Stark shifts (-Omega_1^2/4Delta_1, -Omega_2^2/4Delta_2).
std::pair<double, double> stark_shifts(const LambdaScheme& scheme);

// Raman drive -(Omega_1 Omega_2/4)(1/Delta_1 + 1/Delta_2).  Reported
// separately; not folded into the photon-mediated spin model.
double raman_rabi(const LambdaScheme& scheme);

struct EffectiveDetunings {
  double Delta_xy = 0;  // omega_g2 - omega_g1 + omega_L2 - omega_c, rad/s
  double Delta_z = 0;   // omega_L1 - omega_c, rad/s
  CouplingRegime regime_xy = CouplingRegime::bandgap;
  CouplingRegime regime_z = CouplingRegime::bandgap;
  bool xy_on_edge = false, z_on_edge = false;  // detuning exactly zero
};

EffectiveDetunings effective_detunings(const LambdaScheme& scheme);

enum class SpinChannel { xy, z };

// h_beta = (Omega_l / (2 Delta_beta))^2 with l = 1 for z and l = 2 for xy.
double h_factor(const LambdaScheme& scheme, SpinChannel beta);

// Site positions plus coherent and dissipative coupling matrices from the
// Lambda-scheme reduction.  gamma matrices are identically zero for a
// bandgap-regime channel.
struct SpinModel {
  Eigen::MatrixX2d sites;            // m
  Eigen::MatrixXd Jz, Jxy;           // rad/s, symmetric
  Eigen::MatrixXd gamma_z, gamma_xy; // rad/s, symmetric, PSD in the dispersive regime
  CouplingRegime regime_z = CouplingRegime::bandgap;
  CouplingRegime regime_xy = CouplingRegime::bandgap;
  bool adiabaticity_warning = false;
};

SpinModel build_spin_model(const AtomSpecies& species, const LambdaScheme& scheme,
                           const BandPatch& patch, const Eigen::MatrixX2d& sites);

// kappa = omega_c / Q
double kappa_from_q(double omega_c, double Q);

// kappa_eff = Gamma' + kappa J / |Delta_beta|
double kappa_eff(double kappa, double J, double Delta_beta, double Gamma_prime);

struct CycleReport {
  double N = 0;          // coherent exchange cycles before decoherence
  double J = 0;          // nearest-neighbor coupling, rad/s
  double kappa = 0;      // rad/s
  double kappa_eff = 0;  // rad/s
  double xi = 0;         // m
  bool diverges = false; // kappa = Gamma' = 0
};

// N = J / (kappa J/|Delta| + Gamma') with J the nearest-neighbor bandgap
// kernel value at separation patch.d.
CycleReport coherence_cycles(double Q, double Gamma_prime, const AtomSpecies& species,
                             const BandPatch& patch, double Delta_beta);

struct DetuningOptimum {
  double Delta_star = 0;  // rad/s (magnitude below the band edge)
  double N_max = 0;
  double J_star = 0;      // rad/s
  double xi_star = 0;     // m
  double kappa_eff = 0;   // rad/s
  // |Delta* - kappa J(Delta*)/Gamma'| / Delta*, the balance-relation diagnostic
  double self_consistency = 0;
  bool boundary_warning = false;  // optimum sits on the scan boundary
};

// Golden-section maximization of N(Delta) over log Delta in
// [Delta_lo, Delta_hi] (both > 0, bandgap side).  Deterministic; ties break
// toward smaller Delta.
DetuningOptimum optimize_detuning(double Q, double Gamma_prime, const AtomSpecies& species,
                                  const BandPatch& patch, double Delta_lo, double Delta_hi);

// 1 - e^{-alpha L}
double propagation_loss(double alpha, double L);

}  // namespace pcwlat
