#include "pcwlat/trap_scan.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pcwlat/constants.hpp"

namespace pcwlat {

PotentialField evaluate_grid(const PotentialFn& fn, const Eigen::ArrayXd& x,
                             const Eigen::ArrayXd& y, const Eigen::ArrayXd& z,
                             std::uint64_t scene_hash) {
  Eigen::ArrayXd values(x.size() * y.size() * z.size());
  for (Eigen::Index ix = 0; ix < x.size(); ++ix)
    for (Eigen::Index iy = 0; iy < y.size(); ++iy)
      for (Eigen::Index iz = 0; iz < z.size(); ++iz)
        values[(ix * y.size() + iy) * z.size() + iz] = fn({x[ix], y[iy], z[iz]});
  return {Field3(x, y, z, values), scene_hash};
}

PotentialField evaluate_grid(const TrapScene& scene, const Eigen::ArrayXd& x,
                             const Eigen::ArrayXd& y, const Eigen::ArrayXd& z,
                             std::uint64_t scene_hash) {
  return evaluate_grid([&scene](const Eigen::Vector3d& r) { return total_potential(scene, r); },
                       x, y, z, scene_hash);
}

namespace {

// sub-cell offset of the parabola through (f-, f0, f+), clamped to half a cell
double parabola_offset(double fm, double f0, double fp) {
  const double denom = fm - 2.0 * f0 + fp;
  if (denom <= 0) return 0.0;
  return std::clamp(0.5 * (fm - fp) / denom, -0.5, 0.5);
}

}  // namespace

std::vector<Eigen::Vector3d> find_minima(const PotentialField& pf) {
  const Field3& f = pf.field;
  if (f.nx() < 3 || f.ny() < 3 || f.nz() < 3)
    throw std::invalid_argument("find_minima: need at least 3 grid points per axis");

  struct Candidate {
    Eigen::Vector3d pos;
    double value;
  };
  std::vector<Candidate> found;

  for (Eigen::Index i = 1; i + 1 < f.nx(); ++i)
    for (Eigen::Index j = 1; j + 1 < f.ny(); ++j)
      for (Eigen::Index k = 1; k + 1 < f.nz(); ++k) {
        // local minimum over the 26-neighborhood; ties allowed (degenerate
        // plateaus, e.g. a purely vertical potential) as long as at least one
        // neighbor is strictly higher
        const double v0 = f.at(i, j, k);
        bool is_min = true, any_strict = false;
        for (int di = -1; di <= 1 && is_min; ++di)
          for (int dj = -1; dj <= 1 && is_min; ++dj)
            for (int dk = -1; dk <= 1 && is_min; ++dk) {
              if (!di && !dj && !dk) continue;
              const double v = f.at(i + di, j + dj, k + dk);
              if (v0 > v) is_min = false;
              if (v0 < v) any_strict = true;
            }
        if (!is_min || !any_strict) continue;

        const double ox = parabola_offset(f.at(i - 1, j, k), v0, f.at(i + 1, j, k));
        const double oy = parabola_offset(f.at(i, j - 1, k), v0, f.at(i, j + 1, k));
        const double oz = parabola_offset(f.at(i, j, k - 1), v0, f.at(i, j, k + 1));
        const double hx = ox >= 0 ? f.x()[i + 1] - f.x()[i] : f.x()[i] - f.x()[i - 1];
        const double hy = oy >= 0 ? f.y()[j + 1] - f.y()[j] : f.y()[j] - f.y()[j - 1];
        const double hz = oz >= 0 ? f.z()[k + 1] - f.z()[k] : f.z()[k] - f.z()[k - 1];

        // refined value from the three 1-D parabolas
        double v_ref = v0;
        const auto dip = [](double fm, double f0, double fp) {
          const double denom = fm - 2.0 * f0 + fp;
          if (denom <= 0) return 0.0;
          const double s = 0.5 * (fm - fp);
          return s * s / (2.0 * denom);
        };
        v_ref -= dip(f.at(i - 1, j, k), v0, f.at(i + 1, j, k));
        v_ref -= dip(f.at(i, j - 1, k), v0, f.at(i, j + 1, k));
        v_ref -= dip(f.at(i, j, k - 1), v0, f.at(i, j, k + 1));

        found.push_back({{f.x()[i] + ox * hx, f.y()[j] + oy * hy, f.z()[k] + oz * hz}, v_ref});
      }

  std::stable_sort(found.begin(), found.end(),
                   [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  std::vector<Eigen::Vector3d> out;
  out.reserve(found.size());
  for (const auto& c : found) out.push_back(c.pos);
  return out;
}

namespace {

// Richardson-extrapolated central second derivatives (order 2):
// D = (4 D(h/2) - D(h)) / 3 removes the leading O(h^2) term.
Eigen::Matrix3d fd_hessian(const PotentialFn& V, const Eigen::Vector3d& r0, double h) {
  const auto second = [&](int a, int b, double step) {
    Eigen::Vector3d ea = Eigen::Vector3d::Zero(), eb = Eigen::Vector3d::Zero();
    ea[a] = step;
    eb[b] = step;
    if (a == b)
      return (V(r0 + ea) - 2.0 * V(r0) + V(r0 - ea)) / (step * step);
    return (V(r0 + ea + eb) - V(r0 + ea - eb) - V(r0 - ea + eb) + V(r0 - ea - eb)) /
           (4.0 * step * step);
  };
  Eigen::Matrix3d H;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      const double d1 = second(a, b, h);
      const double d2 = second(a, b, h / 2.0);
      H(a, b) = H(b, a) = (4.0 * d2 - d1) / 3.0;
    }
  return H;
}

// barrier height along +/- dir: running maximum until the potential first
// turns back down, refined by a parabola through the crest
double line_barrier(const PotentialFn& V, const Eigen::Vector3d& r0, const Eigen::Vector3d& dir,
                    double extent, int points, double v_min) {
  if (!(extent > 0) || points < 4) return std::numeric_limits<double>::quiet_NaN();
  const double dt = extent / points;
  double prev2 = v_min, prev = v_min, best = v_min;
  for (int k = 1; k <= points; ++k) {
    const double v = V(r0 + (k * dt) * dir);
    best = std::max(best, v);
    if (k >= 2 && v < prev && prev >= prev2) {
      // crest passed between k-2 and k: parabolic refinement of the maximum
      const double denom = prev2 - 2.0 * prev + v;
      double crest = prev;
      if (denom < 0) crest = prev - (prev2 - v) * (prev2 - v) / (8.0 * denom);
      return crest - v_min;
    }
    prev2 = prev;
    prev = v;
  }
  return best - v_min;  // no saddle before the boundary: depth to the boundary
}

}  // namespace

TrapSite characterize(const PotentialFn& V, double mass, const Eigen::Vector3d& position,
                      const CharacterizeParams& params) {
  if (!(mass > 0)) throw std::invalid_argument("characterize: mass must be > 0");
  if (!(params.fd_scale > 0)) throw std::invalid_argument("characterize: fd_scale must be > 0");

  const double h = 1e-3 * params.fd_scale;
  TrapSite site;
  site.position = position;
  site.value = V(position);
  site.hessian = fd_hessian(V, position, h);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(site.hessian);
  if (es.eigenvalues().minCoeff() <= 0)
    throw std::domain_error("characterize: Hessian not positive definite, not a trap minimum");

  // label each principal axis by the coordinate it mostly points along
  std::array<int, 3> axis_of = {-1, -1, -1};
  std::array<bool, 3> taken = {false, false, false};
  for (int p = 0; p < 3; ++p) {
    int best_axis = -1;
    double best = -1;
    for (int a = 0; a < 3; ++a) {
      const double c = std::abs(es.eigenvectors()(a, p));
      if (!taken[a] && c > best) {
        best = c;
        best_axis = a;
      }
    }
    axis_of[p] = best_axis;
    taken[best_axis] = true;
  }

  for (int p = 0; p < 3; ++p) {
    const int a = axis_of[p];
    site.frequencies[a] = std::sqrt(es.eigenvalues()[p] / mass);
    const Eigen::Vector3d dir = es.eigenvectors().col(p);
    const double extent = params.scan_extent[a];
    if (extent > 0) {
      const double up = line_barrier(V, position, dir, extent, params.scan_points, site.value);
      const double dn = line_barrier(V, position, -dir, extent, params.scan_points, site.value);
      site.depth_per_axis[a] = std::min(up, dn);
    } else {
      site.depth_per_axis[a] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return site;
}

TrapSite characterize(const TrapScene& scene, const Eigen::Vector3d& position,
                      const CharacterizeParams& params) {
  return characterize(
      [&scene](const Eigen::Vector3d& r) { return total_potential(scene, r); },
      scene.species.mass, position, params);
}

double recoil_energy(const AtomSpecies& species, double d) {
  if (!(d > 0)) throw std::domain_error("recoil_energy: requires d > 0");
  return constants::h * constants::h / (8.0 * species.mass * d * d);
}

double depth_in_recoils(double V_d, const AtomSpecies& species, double d) {
  if (!(V_d >= 0)) throw std::domain_error("depth_in_recoils: requires V_d >= 0");
  return V_d / recoil_energy(species, d);
}

TunnelingEstimate tunneling_estimate(double s, const AtomSpecies& species, double d) {
  if (!(s >= 0)) throw std::domain_error("tunneling_estimate: requires s >= 0");
  const double E_R = recoil_energy(species, d);
  TunnelingEstimate out;
  out.J = 4.0 / std::sqrt(constants::pi) * E_R * std::pow(s, 0.75) * std::exp(-2.0 * std::sqrt(s));
  out.below_validity = s < 1.0;
  return out;
}

HubbardScales hubbard_scales(const AtomSpecies& species, double d, double V_d) {
  HubbardScales h;
  h.E_R = recoil_energy(species, d);
  h.s = depth_in_recoils(V_d, species, d);
  h.J_tunnel = tunneling_estimate(h.s, species, d).J;
  h.nu_t = 2.0 * std::sqrt(h.s) * h.E_R / constants::h;
  return h;
}

}  // namespace pcwlat
