#include "pcwlat/raman.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "pcwlat/constants.hpp"
#include "pcwlat/special_functions.hpp"

namespace pcwlat {

LambdaScheme make_lambda_scheme(double Omega_1, double Omega_2, double omega_L1, double omega_L2,
                                double omega_g1, double omega_g2, double omega_e,
                                double omega_c) {
  if (!(Omega_1 >= 0) || !(Omega_2 >= 0))
    throw std::invalid_argument("LambdaScheme: Rabi frequencies must be >= 0");
  LambdaScheme s;
  s.Omega_1 = Omega_1;
  s.Omega_2 = Omega_2;
  s.omega_L1 = omega_L1;
  s.omega_L2 = omega_L2;
  s.omega_g1 = omega_g1;
  s.omega_g2 = omega_g2;
  s.omega_e = omega_e;
  s.omega_c = omega_c;
  s.Delta_1 = omega_e - (omega_g1 + omega_L1);
  s.Delta_2 = omega_e - (omega_g2 + omega_L2);
  for (const auto& [Om, De] : {std::pair{Omega_1, s.Delta_1}, std::pair{Omega_2, s.Delta_2}}) {
    if (Om <= 0) continue;
    const double ratio = std::abs(De) / Om;
    if (ratio < 3.0)
      throw std::invalid_argument(
          "LambdaScheme: |Delta_l|/Omega_l < 3, adiabatic elimination invalid");
    if (ratio < 10.0) s.adiabaticity_warning = true;
  }
  return s;
}

namespace {

void require_off_resonance(const LambdaScheme& s) {
  if (s.Delta_1 == 0 || s.Delta_2 == 0)
    throw std::domain_error("lambda scheme: single-photon resonance (Delta_l = 0)");
}

}  // namespace

std::pair<double, double> stark_shifts(const LambdaScheme& s) {
  require_off_resonance(s);
  return {-s.Omega_1 * s.Omega_1 / (4.0 * s.Delta_1), -s.Omega_2 * s.Omega_2 / (4.0 * s.Delta_2)};
}

double raman_rabi(const LambdaScheme& s) {
  require_off_resonance(s);
  return -(s.Omega_1 * s.Omega_2 / 4.0) * (1.0 / s.Delta_1 + 1.0 / s.Delta_2);
}

EffectiveDetunings effective_detunings(const LambdaScheme& s) {
  EffectiveDetunings d;
  d.Delta_xy = s.omega_g2 - s.omega_g1 + s.omega_L2 - s.omega_c;
  d.Delta_z = s.omega_L1 - s.omega_c;
  d.regime_xy = d.Delta_xy < 0 ? CouplingRegime::bandgap : CouplingRegime::dispersive;
  d.regime_z = d.Delta_z < 0 ? CouplingRegime::bandgap : CouplingRegime::dispersive;
  d.xy_on_edge = d.Delta_xy == 0;
  d.z_on_edge = d.Delta_z == 0;
  return d;
}

double h_factor(const LambdaScheme& s, SpinChannel beta) {
  const EffectiveDetunings d = effective_detunings(s);
  const double Delta_beta = beta == SpinChannel::xy ? d.Delta_xy : d.Delta_z;
  const double Omega_l = beta == SpinChannel::xy ? s.Omega_2 : s.Omega_1;
  if (Delta_beta == 0)
    throw std::domain_error("h_factor: Delta_beta = 0 (laser on the band edge)");
  const double h = Omega_l / (2.0 * Delta_beta);
  return h * h;
}

SpinModel build_spin_model(const AtomSpecies& species, const LambdaScheme& scheme,
                           const BandPatch& patch, const Eigen::MatrixX2d& sites) {
  const Eigen::Index n = sites.rows();
  if (n < 1) throw std::invalid_argument("build_spin_model: need at least one site");
  const EffectiveDetunings det = effective_detunings(scheme);
  if (det.xy_on_edge || det.z_on_edge)
    throw std::domain_error("build_spin_model: effective detuning exactly on the band edge");

  SpinModel m;
  m.sites = sites;
  m.regime_xy = det.regime_xy;
  m.regime_z = det.regime_z;
  m.adiabaticity_warning = scheme.adiabaticity_warning;
  m.Jz = Eigen::MatrixXd::Zero(n, n);
  m.Jxy = Eigen::MatrixXd::Zero(n, n);
  m.gamma_z = Eigen::MatrixXd::Zero(n, n);
  m.gamma_xy = Eigen::MatrixXd::Zero(n, n);

  struct Channel {
    SpinChannel beta;
    double Delta;
    Eigen::MatrixXd* J;
    Eigen::MatrixXd* gamma;
  };
  for (const Channel& ch : {Channel{SpinChannel::xy, det.Delta_xy, &m.Jxy, &m.gamma_xy},
                            Channel{SpinChannel::z, det.Delta_z, &m.Jz, &m.gamma_z}}) {
    const double h = h_factor(scheme, ch.beta);
    const KernelParams kp = make_kernel_params(species, patch, ch.Delta);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        if (i == j) {
          if (kp.regime == CouplingRegime::bandgap) {
            (*ch.J)(i, i) = h * onsite_shift(kp);
          } else {
            // dispersive on-site: full single-emitter rate; the coherent
            // (Lamb) part needs a cutoff model and is not included
            (*ch.gamma)(i, i) = 2.0 * h * (constants::pi / 2.0) * kp.Gamma_2d;
          }
          continue;
        }
        const double r = (sites.row(i) - sites.row(j)).norm();
        if (kp.regime == CouplingRegime::bandgap) {
          const double v = h * kernel_bandgap(kp, r);
          (*ch.J)(i, j) = (*ch.J)(j, i) = v;
        } else {
          const std::complex<double> g = h * kernel_dispersive(kp, r);
          (*ch.gamma)(i, j) = (*ch.gamma)(j, i) = 2.0 * g.real();
          (*ch.J)(i, j) = (*ch.J)(j, i) = g.imag();
        }
      }
    }
  }
  return m;
}

double kappa_from_q(double omega_c, double Q) {
  if (!(Q > 0)) throw std::domain_error("kappa_from_q: requires Q > 0");
  return omega_c / Q;
}

double kappa_eff(double kappa, double J, double Delta_beta, double Gamma_prime) {
  if (Delta_beta == 0) throw std::domain_error("kappa_eff: requires Delta_beta != 0");
  return Gamma_prime + kappa * J / std::abs(Delta_beta);
}

CycleReport coherence_cycles(double Q, double Gamma_prime, const AtomSpecies& species,
                             const BandPatch& patch, double Delta_beta) {
  if (!(Delta_beta != 0)) throw std::domain_error("coherence_cycles: requires Delta_beta != 0");
  CycleReport rep;
  rep.kappa = kappa_from_q(patch.omega_c, Q);
  const KernelParams kp = make_kernel_params(species, patch, -std::abs(Delta_beta));
  rep.xi = kp.xi;
  rep.J = kernel_bandgap(kp, patch.d);  // nearest-neighbor coupling
  rep.kappa_eff = kappa_eff(rep.kappa, rep.J, Delta_beta, Gamma_prime);
  if (rep.kappa_eff <= 0) {
    rep.diverges = true;
    rep.N = std::numeric_limits<double>::infinity();
  } else {
    rep.N = rep.J / rep.kappa_eff;
  }
  return rep;
}

DetuningOptimum optimize_detuning(double Q, double Gamma_prime, const AtomSpecies& species,
                                  const BandPatch& patch, double Delta_lo, double Delta_hi) {
  if (!(Delta_lo > 0 && Delta_hi > Delta_lo))
    throw std::invalid_argument("optimize_detuning: need 0 < Delta_lo < Delta_hi");

  const auto n_of = [&](double Delta) {
    return coherence_cycles(Q, Gamma_prime, species, patch, Delta).N;
  };

  // golden-section in log Delta; ties resolve toward smaller Delta via >=
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(Delta_lo), hi = std::log(Delta_hi);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = n_of(std::exp(x1)), f2 = n_of(std::exp(x2));
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    if (f1 >= f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = n_of(std::exp(x1));
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = n_of(std::exp(x2));
    }
  }
  DetuningOptimum opt;
  opt.Delta_star = std::exp(0.5 * (lo + hi));
  const CycleReport rep = coherence_cycles(Q, Gamma_prime, species, patch, opt.Delta_star);
  opt.N_max = rep.N;
  opt.J_star = rep.J;
  opt.xi_star = rep.xi;
  opt.kappa_eff = rep.kappa_eff;
  opt.self_consistency =
      Gamma_prime > 0
          ? std::abs(opt.Delta_star - rep.kappa * rep.J / Gamma_prime) / opt.Delta_star
          : std::numeric_limits<double>::quiet_NaN();
  const double span = std::log(Delta_hi / Delta_lo);
  opt.boundary_warning = std::log(opt.Delta_star / Delta_lo) < 0.015 * span ||
                         std::log(Delta_hi / opt.Delta_star) < 0.015 * span;
  return opt;
}

double propagation_loss(double alpha, double L) {
  if (!(alpha >= 0) || !(L >= 0))
    throw std::domain_error("propagation_loss: requires nonnegative alpha and L");
  return -std::expm1(-alpha * L);
}

}  // namespace pcwlat
