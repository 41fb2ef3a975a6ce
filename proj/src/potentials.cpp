#include "pcwlat/potentials.hpp"

#include <cmath>
#include <stdexcept>

#include "pcwlat/constants.hpp"

namespace pcwlat {

SIBeamParams make_si_params(double Omega_SI, double lambda_SI, double delta_SI, double phi) {
  if (!(Omega_SI >= 0)) throw std::invalid_argument("SIBeamParams: Omega_SI must be >= 0");
  if (!(lambda_SI > 0)) throw std::invalid_argument("SIBeamParams: lambda_SI must be > 0");
  if (delta_SI == 0) throw std::invalid_argument("SIBeamParams: delta_SI must be nonzero");
  SIBeamParams p;
  p.Omega_SI = Omega_SI;
  p.lambda_SI = lambda_SI;
  p.delta_SI = delta_SI;
  p.phi = phi;
  p.k_SI = constants::two_pi / lambda_SI;
  return p;
}

double si_zt_from_phase(double phi, double k_SI) { return phi / (2.0 * k_SI); }

GMLatticeParams make_gm_params(double Omega_GM, double delta, double k_par, double beta_decay,
                               double z_surface, GmPattern pattern) {
  if (delta == 0) throw std::invalid_argument("GMLatticeParams: delta must be nonzero");
  if (!(beta_decay > 0)) throw std::invalid_argument("GMLatticeParams: beta_decay must be > 0");
  if (!(k_par > 0)) throw std::invalid_argument("GMLatticeParams: k_par must be > 0");
  return {Omega_GM, delta, k_par, beta_decay, z_surface, pattern};
}

double cp_plane(const AtomSpecies& species, double n, double z) {
  if (!(z > 0)) throw std::domain_error("cp_plane: requires z > 0 above the surface");
  if (!(n > 1)) throw std::domain_error("cp_plane: requires n > 1");
  const double q = (n * n - 1.0) / (n * n + 1.0);
  const double kz = species.k_a * z;
  return -(1.0 / 16.0) * q * constants::hbar * species.Gamma_a / (kz * kz * kz);
}

double cp_hole_factor(double z, double R) {
  if (!(z > 0) || !(R > 0)) throw std::domain_error("cp_hole_factor: requires z > 0 and R > 0");
  const double z2 = z * z, R2 = R * R;
  const double sum2 = R2 + z2;
  return 0.5 + std::atan((z2 - R2) / (2.0 * R * z)) / constants::pi +
         2.0 * z * R * (z2 - R2) / (constants::pi * sum2 * sum2);
}

double si_potential(const SIBeamParams& params, double z, double z_t) {
  const double s = std::sin(params.k_SI * (z - z_t));
  return -constants::hbar * params.Omega_SI * params.Omega_SI / params.delta_SI * s * s;
}

double gm_potential(const GMLatticeParams& params, const Eigen::Vector3d& r) {
  if (r.z() < params.z_surface)
    throw std::domain_error("gm_potential: requires z >= z_surface (evanescent region)");
  const double cx = std::cos(params.k_par * r.x());
  const double cy = std::cos(params.k_par * r.y());
  const double P = params.pattern == GmPattern::incoherent_xy_sum
                       ? 0.5 * (cx * cx + cy * cy)
                       : cx * cx;
  const double vertical = std::exp(-2.0 * params.beta_decay * (r.z() - params.z_surface));
  return -constants::hbar * params.Omega_GM * params.Omega_GM / params.delta * vertical * P;
}

double cp_potential(const CPModel& model, const AtomSpecies& species, const Eigen::Vector3d& r) {
  switch (model.variant) {
    case CpVariant::analytic_plane:
      return cp_plane(species, model.n, r.z() - model.z_surface);
    case CpVariant::analytic_hole:
      return cp_plane(species, model.n, r.z() - model.z_surface) *
             cp_hole_factor(r.z() - model.z_surface, model.R);
    case CpVariant::ingested_grid:
      if (!model.grid) throw std::invalid_argument("cp term: ingested_grid without grid data");
      try {
        return model.grid->interpolate(r);
      } catch (const std::out_of_range& e) {
        throw std::out_of_range(std::string("cp term: ") + e.what());
      }
  }
  throw std::invalid_argument("cp term: unknown variant");
}

double total_potential(const TrapScene& scene, const Eigen::Vector3d& r) {
  double v = 0.0;
  for (const auto& t : scene.cp)
    if (t.enabled) v += cp_potential(t.model, scene.species, r);
  for (const auto& t : scene.si)
    if (t.enabled) v += si_potential(t.params, r.z(), t.z_t);
  for (const auto& t : scene.gm)
    if (t.enabled) v += gm_potential(t.params, r);
  return v;
}

double stability_intensity_bound(const AtomSpecies& species, double n, double z_t,
                                 double delta_SI, double k_SI) {
  if (!(z_t > 0)) throw std::domain_error("stability_intensity_bound: requires z_t > 0");
  if (!(delta_SI > 0)) throw std::domain_error("stability_intensity_bound: requires delta_SI > 0");
  if (!(n >= 1)) throw std::domain_error("stability_intensity_bound: requires n >= 1");
  if (!(k_SI > 0)) throw std::domain_error("stability_intensity_bound: requires k_SI > 0");
  const double q = (n * n - 1.0) / (n * n + 1.0);
  const double ka_zt = species.k_a * z_t;
  const double ksi_zt = k_SI * z_t;
  return std::sqrt(3.0 / 32.0 * q * delta_SI * species.Gamma_a /
                   (ka_zt * ka_zt * ka_zt * ksi_zt * ksi_zt));
}

double contrast(const Eigen::ArrayXXd& intensity_plane) {
  if (intensity_plane.size() == 0) throw std::invalid_argument("contrast: empty plane");
  if ((intensity_plane < 0).any())
    throw std::invalid_argument("contrast: intensity samples must be nonnegative");
  const double hi = intensity_plane.maxCoeff();
  const double lo = intensity_plane.minCoeff();
  if (hi == 0.0) throw std::domain_error("contrast: all-zero plane, contrast undefined");
  return (hi - lo) / (hi + lo);
}

double omega_conf(const AtomSpecies& species, double d, double C, double delta_lambda_inv) {
  if (!(d > 0)) throw std::domain_error("omega_conf: requires d > 0");
  if (C == 0) throw std::domain_error("omega_conf: zero contrast, trap infeasible");
  if (!(C > 0 && C <= 1)) throw std::domain_error("omega_conf: requires 0 < C <= 1");
  return std::sqrt(2.0 * constants::h * constants::c * std::abs(delta_lambda_inv) /
                   (species.mass * d * d * C));
}

double scattering_rate(double trap_depth, double delta, const AtomSpecies& species) {
  if (delta == 0) throw std::domain_error("scattering_rate: requires delta != 0");
  return trap_depth / constants::hbar * species.Gamma_a / std::abs(delta);
}

double nonlinear_phase(double n2, double intensity, double W_thick, double lambda) {
  if (!(n2 >= 0 && intensity >= 0 && W_thick >= 0))
    throw std::domain_error("nonlinear_phase: requires nonnegative n2, I, W");
  if (!(lambda > 0)) throw std::domain_error("nonlinear_phase: requires lambda > 0");
  return constants::two_pi * n2 * intensity * W_thick / lambda;
}

}  // namespace pcwlat
