#include "pcwlat/band_coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pcwlat/constants.hpp"
#include "pcwlat/special_functions.hpp"

namespace pcwlat {

BandPatch make_band_patch(double omega_c, double A, double L_m, double d) {
  if (A == 0) throw std::invalid_argument("BandPatch: curvature A must be nonzero");
  if (!(L_m > 0)) throw std::invalid_argument("BandPatch: L_m must be > 0");
  if (!(d > 0)) throw std::invalid_argument("BandPatch: d must be > 0");
  if (!(omega_c > 0)) throw std::invalid_argument("BandPatch: omega_c must be > 0");
  return {omega_c, constants::pi / d, A, L_m, d};
}

void BandGrid::validate() const {
  if (kx.size() < 3 || ky.size() < 3)
    throw std::invalid_argument("BandGrid: need at least 3 samples per axis");
  if (omega.rows() != kx.size() || omega.cols() != ky.size() || L_m.rows() != kx.size() ||
      L_m.cols() != ky.size())
    throw std::invalid_argument("BandGrid: sample shape does not match axes");
  if (!(d > 0)) throw std::invalid_argument("BandGrid: d must be > 0");
  for (const auto* a : {&kx, &ky}) {
    const double h0 = (*a)[1] - (*a)[0];
    if (!(h0 > 0)) throw std::invalid_argument("BandGrid: axes must be ascending");
    for (Eigen::Index i = 0; i + 1 < a->size(); ++i) {
      const double h = (*a)[i + 1] - (*a)[i];
      if (!(h > 0) || std::abs(h - h0) > 1e-6 * h0)
        throw std::invalid_argument("BandGrid: axes must be uniform and ascending");
    }
  }
  if (std::abs(kx[1] - kx[0] - (ky[1] - ky[0])) > 1e-6 * (kx[1] - kx[0]))
    throw std::invalid_argument("BandGrid: kx and ky spacing must match");
  if (!omega.isFinite().all()) throw std::invalid_argument("BandGrid: non-finite omega");
  if (!(L_m > 0).all()) throw std::invalid_argument("BandGrid: L_m must be > 0");
}

double BandGrid::spacing() const { return kx[1] - kx[0]; }

KernelParams make_kernel_params(const AtomSpecies& species, const BandPatch& patch,
                                double Delta) {
  KernelParams p;
  p.Gamma_2d = gamma_2d(species, patch);
  p.xi = interaction_length(patch.A, Delta);
  p.regime = Delta < 0 ? CouplingRegime::bandgap : CouplingRegime::dispersive;
  p.Delta = Delta;
  p.k_cutoff = constants::pi / patch.d;
  return p;
}

double effective_mode_length(const FieldDensity& field, const Eigen::Vector3d& r_a, double d) {
  if (!(d > 0)) throw std::invalid_argument("effective_mode_length: d must be > 0");
  const Field3& eps = field.eps;
  const Field3& e2 = field.E2;
  if (eps.nx() != e2.nx() || eps.ny() != e2.ny() || eps.nz() != e2.nz())
    throw std::invalid_argument("effective_mode_length: eps and E2 grids differ");

  const auto trap_w = [](const Eigen::ArrayXd& a, Eigen::Index i) {
    if (a.size() == 1) return 1.0;  // collapsed axis: unit weight (2-D data)
    double w = 0;
    if (i > 0) w += 0.5 * (a[i] - a[i - 1]);
    if (i + 1 < a.size()) w += 0.5 * (a[i + 1] - a[i]);
    return w;
  };

  double integral = 0;
  for (Eigen::Index i = 0; i < eps.nx(); ++i)
    for (Eigen::Index j = 0; j < eps.ny(); ++j)
      for (Eigen::Index k = 0; k < eps.nz(); ++k)
        integral += trap_w(eps.x(), i) * trap_w(eps.y(), j) * trap_w(eps.z(), k) *
                    eps.at(i, j, k) * e2.at(i, j, k);

  const double denom = eps.interpolate(r_a) * e2.interpolate(r_a);
  if (!(denom > 0))
    throw std::domain_error(
        "effective_mode_length: field density vanishes at the atom position (mode length "
        "diverges)");
  return integral / (d * d * denom);
}

namespace {

CurvatureFit parabola_fit(const Eigen::ArrayXd& k, const Eigen::ArrayXd& w) {
  Eigen::MatrixXd M(k.size(), 2);
  M.col(0).setOnes();
  M.col(1) = (k * k).matrix();
  const Eigen::Vector2d coef =
      M.colPivHouseholderQr().solve(w.matrix());
  const Eigen::ArrayXd resid = w - (M * coef).array();
  CurvatureFit fit;
  fit.omega_c_fit = coef[0];
  fit.A = coef[1];
  fit.rms_residual = std::sqrt(resid.square().mean());
  const double span = w.maxCoeff() - w.minCoeff();
  fit.quality_warning = span > 0 && fit.rms_residual > 1e-2 * span;
  return fit;
}

}  // namespace

CurvatureFit fit_curvature(const BandGrid& grid, FitDirection direction, double k_window) {
  grid.validate();
  const bool along_ky = direction == FitDirection::x_to_m;
  const Eigen::ArrayXd& axis = along_ky ? grid.ky : grid.kx;
  if (k_window <= 0) k_window = 0.25 * axis[axis.size() - 1];

  std::vector<double> ks, ws;
  for (Eigen::Index i = 0; i < axis.size(); ++i) {
    if (axis[i] <= k_window) {
      ks.push_back(axis[i]);
      ws.push_back(along_ky ? grid.omega(0, i) : grid.omega(i, 0));
    }
  }
  if (ks.size() < 5)
    throw std::invalid_argument(
        "fit_curvature: fewer than 5 samples inside the parabolic window");
  return parabola_fit(Eigen::Map<Eigen::ArrayXd>(ks.data(), ks.size()),
                      Eigen::Map<Eigen::ArrayXd>(ws.data(), ws.size()));
}

double gamma_2d(const AtomSpecies& species, const BandPatch& patch) {
  const double sigma = 3.0 / constants::two_pi * species.eta * species.lambda_a * species.lambda_a;
  return species.Gamma_a * constants::c * sigma /
         (4.0 * constants::pi * std::abs(patch.A) * patch.L_m);
}

double interaction_length(double A, double Delta) {
  if (Delta == 0) throw std::domain_error("interaction_length: Delta = 0, length diverges");
  if (A == 0) throw std::domain_error("interaction_length: curvature A must be nonzero");
  return std::sqrt(std::abs(A / Delta));
}

double kernel_bandgap(const KernelParams& params, double r) {
  if (params.regime != CouplingRegime::bandgap)
    throw std::domain_error("kernel_bandgap: params are in the dispersive regime");
  if (!(r > 0))
    throw std::domain_error("kernel_bandgap: r = 0 is the on-site shift (see onsite_shift)");
  return params.Gamma_2d * bessel_k0(r / params.xi);
}

std::complex<double> kernel_dispersive(const KernelParams& params, double r) {
  if (params.regime != CouplingRegime::dispersive)
    throw std::domain_error("kernel_dispersive: params are in the bandgap regime");
  if (!(r > 0)) throw std::domain_error("kernel_dispersive: r = 0 handled separately");
  return constants::pi / 2.0 * params.Gamma_2d * hankel1_0(r / params.xi);
}

double onsite_shift(const KernelParams& params) {
  if (params.regime != CouplingRegime::bandgap)
    throw std::domain_error("onsite_shift: bandgap regime only");
  const double kx = params.k_cutoff * params.xi;
  return params.Gamma_2d * 0.5 * std::log1p(kx * kx);
}

XPointPhase xpoint_phase(double k_c, const Eigen::Vector2d& r_ij, double d) {
  if (!(k_c > 0) || !(d > 0)) throw std::invalid_argument("xpoint_phase: k_c, d must be > 0");
  XPointPhase out;
  const double nx = r_ij.x() / d, ny = r_ij.y() / d;
  const bool on_lattice = std::abs(nx - std::round(nx)) < 1e-9 &&
                          std::abs(ny - std::round(ny)) < 1e-9;
  if (on_lattice) {
    // exact parity, no trigonometric roundoff
    out.phase_x = (static_cast<long long>(std::llround(nx)) % 2 == 0) ? 1.0 : -1.0;
    out.phase_y = (static_cast<long long>(std::llround(ny)) % 2 == 0) ? 1.0 : -1.0;
  } else {
    out.fractional_warning = true;
    out.phase_x = std::cos(k_c * r_ij.x());
    out.phase_y = std::cos(k_c * r_ij.y());
  }
  return out;
}

namespace {

// composite Simpson weights for n >= 3 uniform samples; odd interval counts
// finish with the 3/8 rule
Eigen::ArrayXd simpson_weights(Eigen::Index n, double h) {
  if (n < 3) throw std::invalid_argument("simpson_weights: need >= 3 samples");
  Eigen::ArrayXd w = Eigen::ArrayXd::Zero(n);
  Eigen::Index intervals = n - 1;
  Eigen::Index simpson_end = (intervals % 2 == 0) ? n - 1 : n - 4;
  for (Eigen::Index i = 0; i + 2 <= simpson_end; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  if (intervals % 2 != 0) {
    const Eigen::Index i = n - 4;  // last three intervals, 3/8 rule
    w[i] += 3.0 * h / 8.0;
    w[i + 1] += 9.0 * h / 8.0;
    w[i + 2] += 9.0 * h / 8.0;
    w[i + 3] += 3.0 * h / 8.0;
  }
  return w;
}

double coupling_g2l2(const AtomSpecies& species, double omega, double lm, double omega_a) {
  const double sigma = 3.0 / constants::two_pi * species.eta * species.lambda_a * species.lambda_a;
  return species.Gamma_a * constants::c * sigma * omega / (4.0 * lm * omega_a);
}

struct LocalBandModel {
  // omega ~ omega0 + c0 + c1 tx^2 + c2 ty^2 + c3 tx^2 ty^2 with t = k/kscale;
  // scaled variables keep the least-squares fit well conditioned
  double omega0 = 0;
  double kscale = 1;
  Eigen::Vector4d c;
  double eval(double kx, double ky) const {
    const double x2 = (kx / kscale) * (kx / kscale);
    const double y2 = (ky / kscale) * (ky / kscale);
    return omega0 + c[0] + c[1] * x2 + c[2] * y2 + c[3] * x2 * y2;
  }
};

LocalBandModel fit_local_band(const BandGrid& grid, Eigen::Index bx, Eigen::Index by) {
  LocalBandModel model;
  model.omega0 = grid.omega(0, 0);
  model.kscale = std::max(grid.kx[bx], grid.ky[by]);
  const Eigen::Index n = (bx + 1) * (by + 1);
  Eigen::MatrixXd M(n, 4);
  Eigen::VectorXd rhs(n);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i <= bx; ++i)
    for (Eigen::Index j = 0; j <= by; ++j, ++row) {
      const double x2 = (grid.kx[i] / model.kscale) * (grid.kx[i] / model.kscale);
      const double y2 = (grid.ky[j] / model.kscale) * (grid.ky[j] / model.kscale);
      M.row(row) << 1.0, x2, y2, x2 * y2;
      rhs[row] = grid.omega(i, j) - model.omega0;
    }
  model.c = M.colPivHouseholderQr().solve(rhs);
  return model;
}

double bilinear(const Eigen::ArrayXd& ax, const Eigen::ArrayXd& ay, const Eigen::ArrayXXd& v,
                double x, double y) {
  const auto locate = [](const Eigen::ArrayXd& a, double t, Eigen::Index& i) {
    i = std::min<Eigen::Index>(
        a.size() - 2,
        std::max<Eigen::Index>(0, static_cast<Eigen::Index>((t - a[0]) / (a[1] - a[0]))));
    return std::clamp((t - a[i]) / (a[i + 1] - a[i]), 0.0, 1.0);
  };
  Eigen::Index i, j;
  const double fx = locate(ax, x, i);
  const double fy = locate(ay, y, j);
  return (1 - fx) * (1 - fy) * v(i, j) + fx * (1 - fy) * v(i + 1, j) +
         (1 - fx) * fy * v(i, j + 1) + fx * fy * v(i + 1, j + 1);
}

// curvature of the on-grid dispersion near the origin, one direction
double edge_curvature(const BandGrid& grid, bool along_ky) {
  const Eigen::ArrayXd& axis = along_ky ? grid.ky : grid.kx;
  const Eigen::Index m = std::min<Eigen::Index>(5, axis.size());
  Eigen::ArrayXd k(m), w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    k[i] = axis[i];
    w[i] = along_ky ? grid.omega(0, i) : grid.omega(i, 0);
  }
  return parabola_fit(k, w).A;
}

}  // namespace

double bz_integrate_bandgap(const BandGrid& grid, const AtomSpecies& species, double omega_a,
                            const Eigen::Vector2d& r_ij, const BzQuadratureOptions& options) {
  grid.validate();
  const double omega_min = grid.omega.minCoeff();
  if (!(omega_a < omega_min))
    throw std::domain_error(
        "bz_integrate_bandgap: omega_a lies inside the band (pole); use the dispersive path");

  const double h = grid.spacing();
  const double Ax = std::abs(edge_curvature(grid, false));
  const double Ay = std::abs(edge_curvature(grid, true));
  const double delta = grid.omega(0, 0) - omega_a;  // > 0
  const double xi_big = std::sqrt(std::max(Ax, Ay) / delta);

  // the local-model refinement is allowed for long-range kernels and kicks
  // in when the stored grid does not resolve the peak width 1/xi
  const bool refine = options.allow_refinement && xi_big > 10.0 * grid.d && h * xi_big > 0.35;
  if (h * xi_big > 1.0 && !refine)
    throw std::invalid_argument(
        "bz_integrate_bandgap: grid spacing does not resolve the interaction peak width 1/xi; "
        "refine the band grid or enable refinement");

  const auto integrand = [&](double omega, double lm, double kx, double ky) {
    return coupling_g2l2(species, omega, lm, omega_a) / (omega - omega_a) *
           std::cos(kx * r_ij.x()) * std::cos(ky * r_ij.y());
  };

  const Eigen::ArrayXd wx = simpson_weights(grid.kx.size(), h);
  const Eigen::ArrayXd wy = simpson_weights(grid.ky.size(), h);

  double coarse = 0;
  for (Eigen::Index i = 0; i < grid.kx.size(); ++i)
    for (Eigen::Index j = 0; j < grid.ky.size(); ++j)
      coarse += wx[i] * wy[j] * integrand(grid.omega(i, j), grid.L_m(i, j), grid.kx[i], grid.ky[j]);

  double correction = 0;
  if (refine) {
    const double radius = options.refine_radius_xi / xi_big;
    Eigen::Index b = static_cast<Eigen::Index>(std::ceil(radius / h));
    b = std::clamp<Eigen::Index>(b, 2, std::min(grid.kx.size(), grid.ky.size()) / 2);

    // subtract the coarse rule over the block, add a fine rule on a local
    // quadratic band model (L_m interpolated bilinearly)
    const Eigen::ArrayXd bwx = simpson_weights(b + 1, h);
    const Eigen::ArrayXd bwy = simpson_weights(b + 1, h);
    double coarse_block = 0;
    for (Eigen::Index i = 0; i <= b; ++i)
      for (Eigen::Index j = 0; j <= b; ++j)
        coarse_block +=
            bwx[i] * bwy[j] * integrand(grid.omega(i, j), grid.L_m(i, j), grid.kx[i], grid.ky[j]);

    const LocalBandModel model = fit_local_band(grid, b, b);
    // fine step must beat both the base grid and the peak width
    const Eigen::Index subdiv = std::max<Eigen::Index>(
        options.refine_subdiv,
        std::max<Eigen::Index>(4 * b,
                               static_cast<Eigen::Index>(std::ceil(b * h * xi_big * 10.0))));
    const Eigen::Index nf = subdiv + 1;
    const double hf = (b * h) / subdiv;
    const Eigen::ArrayXd fw = simpson_weights(nf, hf);
    double fine_block = 0;
    for (Eigen::Index i = 0; i < nf; ++i)
      for (Eigen::Index j = 0; j < nf; ++j) {
        const double kx = i * hf, ky = j * hf;
        const double om = model.eval(kx, ky);
        const double lm = bilinear(grid.kx, grid.ky, grid.L_m, kx, ky);
        fine_block += fw[i] * fw[j] * integrand(om, lm, kx, ky);
      }
    correction = fine_block - coarse_block;
  }

  const double quadrant = coarse + correction;
  return 8.0 * quadrant / (constants::two_pi * constants::two_pi);
}

std::complex<double> bz_integrate_dispersive(const BandGrid& grid, const AtomSpecies& species,
                                             double omega_a, const Eigen::Vector2d& r_ij) {
  grid.validate();
  const double omega_min = grid.omega.minCoeff();
  const double omega_max = grid.omega.maxCoeff();
  if (!(omega_a > omega_min && omega_a < omega_max))
    throw std::domain_error(
        "bz_integrate_dispersive: omega_a is outside the band; use the bandgap path");

  const double h = grid.spacing();
  const double Ax = std::abs(edge_curvature(grid, false));
  const double Ay = std::abs(edge_curvature(grid, true));
  const double delta = omega_a - grid.omega(0, 0);
  // s must dominate the per-cell sweep of the denominator across the
  // resonant ring, |grad omega| h ~ 2 sqrt(A delta) h
  const double s0 = 16.0 * std::sqrt(std::sqrt(Ax * Ay) * std::max(delta, 0.0)) * h +
                    1e-12 * std::abs(omega_a);

  const Eigen::ArrayXd wx = simpson_weights(grid.kx.size(), h);
  const Eigen::ArrayXd wy = simpson_weights(grid.ky.size(), h);

  const auto eval = [&](double s) {
    std::complex<double> acc = 0;
    for (Eigen::Index i = 0; i < grid.kx.size(); ++i)
      for (Eigen::Index j = 0; j < grid.ky.size(); ++j) {
        const std::complex<double> den(s, omega_a - grid.omega(i, j));
        acc += wx[i] * wy[j] *
               coupling_g2l2(species, grid.omega(i, j), grid.L_m(i, j), omega_a) / den *
               std::cos(grid.kx[i] * r_ij.x()) * std::cos(grid.ky[j] * r_ij.y());
      }
    return acc * 8.0 / (constants::two_pi * constants::two_pi);
  };

  // quadratic Richardson extrapolation of f(s) to s -> 0
  const std::complex<double> f1 = eval(s0);
  const std::complex<double> f2 = eval(s0 / 2.0);
  const std::complex<double> f3 = eval(s0 / 4.0);
  return (8.0 * f3 - 6.0 * f2 + f1) / 3.0;
}

CurvatureFit fit_curvature_isotropic(const BandGrid& grid, const AtomSpecies& species,
                                     const Eigen::ArrayXd& deltas_below_edge,
                                     const Eigen::Vector2d& r_ij) {
  grid.validate();
  if (deltas_below_edge.size() < 1)
    throw std::invalid_argument("fit_curvature_isotropic: need at least one detuning");
  const double omega_c = grid.omega(0, 0);
  const double lm0 = grid.L_m(0, 0);
  const double r = r_ij.norm();

  Eigen::ArrayXd j_num(deltas_below_edge.size());
  for (Eigen::Index i = 0; i < deltas_below_edge.size(); ++i) {
    const double delta = deltas_below_edge[i];
    if (!(delta > 0))
      throw std::invalid_argument("fit_curvature_isotropic: detunings must be > 0 (below edge)");
    j_num[i] = bz_integrate_bandgap(grid, species, omega_c - delta, r_ij);
  }

  const auto mismatch = [&](double a) {
    const BandPatch patch = make_band_patch(omega_c, a, lm0, grid.d);
    double acc = 0;
    for (Eigen::Index i = 0; i < deltas_below_edge.size(); ++i) {
      const KernelParams kp = make_kernel_params(species, patch, -deltas_below_edge[i]);
      const double j_iso = kernel_bandgap(kp, r);
      const double rel = (j_iso - j_num[i]) / j_num[i];
      acc += rel * rel;
    }
    return acc;
  };

  // golden-section on log A around the directional curvatures
  const double a_lo = 0.2 * std::min(std::abs(edge_curvature(grid, false)),
                                     std::abs(edge_curvature(grid, true)));
  const double a_hi = 5.0 * std::max(std::abs(edge_curvature(grid, false)),
                                     std::abs(edge_curvature(grid, true)));
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(a_lo), hi = std::log(a_hi);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = mismatch(std::exp(x1)), f2 = mismatch(std::exp(x2));
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = mismatch(std::exp(x1));
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = mismatch(std::exp(x2));
    }
  }
  CurvatureFit fit;
  fit.A = std::exp(0.5 * (lo + hi));
  fit.omega_c_fit = omega_c;
  fit.rms_residual = std::sqrt(mismatch(fit.A) / deltas_below_edge.size());
  fit.quality_warning = fit.rms_residual > 0.25;
  return fit;
}

}  // namespace pcwlat
