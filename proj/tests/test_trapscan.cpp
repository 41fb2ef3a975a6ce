#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pcwlat/constants.hpp"
#include "pcwlat/trap_scan.hpp"
#include "pcwlat/units.hpp"

using namespace pcwlat;
namespace C = pcwlat::constants;

namespace {
const AtomSpecies& rb() { return SpeciesTable::builtin().lookup("Rb87-D2"); }

Eigen::ArrayXd lin(double a, double b, int n) { return Eigen::ArrayXd::LinSpaced(n, a, b); }

// independent 1-D band-structure oracle: lowest-band width of the potential
// s E_R sin^2(pi x / d) from a 32-plane-wave diagonalization; J = width/4
double band_tunneling_in_recoils(double s, int nbasis = 32) {
  const auto lowest = [&](double q_tilde) {  // q d/pi in [-1, 1]
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nbasis, nbasis);
    for (int l = 0; l < nbasis; ++l) {
      const double m = l - nbasis / 2;
      h(l, l) = (q_tilde + 2 * m) * (q_tilde + 2 * m) + s / 2.0;
      if (l + 1 < nbasis) h(l, l + 1) = h(l + 1, l) = -s / 4.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
  };
  return (lowest(1.0) - lowest(0.0)) / 4.0;
}

}  // namespace

TEST_CASE("evaluate_grid reproduces the scene exactly") {
  TrapScene scene;
  scene.species = rb();
  const double delta_si = to_angular(C::c * (1 / rb().lambda_a - 1 / 760e-9));
  scene.cp.push_back({CPModel{CpVariant::analytic_plane, 3.25, 0.0, 0.0, nullptr}, true});
  scene.si.push_back({make_si_params(to_angular(50e9), 760e-9, delta_si), 65e-9, true});

  const auto field = evaluate_grid(scene, lin(-40e-9, 40e-9, 16), lin(-40e-9, 40e-9, 16),
                                   lin(30e-9, 150e-9, 16), 77);
  CHECK(field.scene_hash == 77);

  std::mt19937 rng(3);
  std::uniform_int_distribution<int> pick(0, 15);
  for (int t = 0; t < 10; ++t) {
    const int i = pick(rng), j = pick(rng), k = pick(rng);
    const Eigen::Vector3d r{field.field.x()[i], field.field.y()[j], field.field.z()[k]};
    CHECK(field.field.at(i, j, k) == total_potential(scene, r));
  }

  // rerun is bit-identical
  const auto again = evaluate_grid(scene, lin(-40e-9, 40e-9, 16), lin(-40e-9, 40e-9, 16),
                                   lin(30e-9, 150e-9, 16), 77);
  CHECK((again.field.values() == field.field.values()).all());

  // single-point axes reproduce total_potential directly
  const auto one = evaluate_grid(scene, lin(1e-9, 1e-9, 1), lin(2e-9, 2e-9, 1),
                                 lin(80e-9, 80e-9, 1));
  CHECK(one.field.at(0, 0, 0) == total_potential(scene, {1e-9, 2e-9, 80e-9}));
}

TEST_CASE("find_minima: sin^2 nodes of a pure SI field") {
  const double lambda = 760e-9;
  const double k = C::two_pi / lambda;
  const double z_t = 65e-9;
  const auto p = make_si_params(to_angular(50e9), lambda,
                                -to_angular(C::c * (1 / 760e-9 - 1 / rb().lambda_a)));
  const PotentialFn v = [&](const Eigen::Vector3d& r) { return si_potential(p, r.z(), z_t); };

  const auto field =
      evaluate_grid(v, lin(-20e-9, 20e-9, 5), lin(-20e-9, 20e-9, 5), lin(20e-9, 920e-9, 181));
  const auto minima = find_minima(field);
  REQUIRE(!minima.empty());
  for (const auto& m : minima) {
    const double cycles = (m.z() - z_t) / (C::pi / k);
    CHECK(std::abs(cycles - std::round(cycles)) < 0.02);
  }
}

TEST_CASE("find_minima: separable cosine lattice sits on the lattice points") {
  const double d = 100e-9;
  const PotentialFn v = [&](const Eigen::Vector3d& r) {
    const auto s2 = [&](double t) { const double s = std::sin(C::pi * t / d); return s * s; };
    return 1e-27 * (s2(r.x()) + s2(r.y()) + s2(r.z()));
  };
  const auto field = evaluate_grid(v, lin(-145e-9, 145e-9, 30), lin(-145e-9, 145e-9, 30),
                                   lin(-145e-9, 145e-9, 30));
  const auto minima = find_minima(field);
  CHECK(minima.size() == 27);  // 3 lattice planes per axis inside the box
  for (const auto& m : minima)
    for (int a = 0; a < 3; ++a) {
      const double frac = m[a] / d - std::round(m[a] / d);
      CHECK(std::abs(frac) * d < 1.5e-9);  // well under half the 10 nm grid step
    }
}

TEST_CASE("find_minima: randomized quadratic bowl recovered within half a step") {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> u(-30e-9, 30e-9);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Vector3d center{u(rng), u(rng), u(rng)};
    const PotentialFn v = [&](const Eigen::Vector3d& r) {
      return 1e-27 * (r - center).squaredNorm() / 1e-14;
    };
    const auto field = evaluate_grid(v, lin(-100e-9, 100e-9, 21), lin(-100e-9, 100e-9, 21),
                                     lin(-100e-9, 100e-9, 21));
    const auto minima = find_minima(field);
    REQUIRE(minima.size() == 1);
    const double step = 10e-9;
    CHECK((minima[0] - center).norm() < 0.5 * step);
    // quadratic refinement should in fact nail a quadratic to high accuracy
    CHECK((minima[0] - center).norm() < 1e-3 * step);
  }
}

TEST_CASE("find_minima is stable under grid refinement") {
  const double d = 100e-9;
  const PotentialFn v = [&](const Eigen::Vector3d& r) {
    const auto s2 = [&](double t) { const double s = std::sin(C::pi * t / d); return s * s; };
    return 1e-27 * (s2(r.x()) + s2(r.y()) + s2(r.z())) - 5e-28 * std::cos(r.x() / d);
  };
  Eigen::Vector3d prev = Eigen::Vector3d::Zero();
  double prev_delta = std::numeric_limits<double>::infinity();
  bool have_prev = false;
  for (const int n : {21, 41, 81}) {
    const auto field = evaluate_grid(v, lin(-45e-9, 45e-9, n), lin(-45e-9, 45e-9, n),
                                     lin(-45e-9, 45e-9, n));
    const auto minima = find_minima(field);
    REQUIRE(!minima.empty());
    if (have_prev) {
      const double delta = (minima[0] - prev).norm();
      CHECK(delta <= prev_delta + 1e-12);
      prev_delta = delta;
    }
    prev = minima[0];
    have_prev = true;
  }
  CHECK(prev_delta < 0.3e-9);
}

TEST_CASE("characterize: exact frequencies for an isotropic harmonic scene") {
  const double omega = to_angular(1.5e6);
  const double m = rb().mass;
  const Eigen::Vector3d r0{3e-9, -4e-9, 110e-9};
  const PotentialFn v = [&](const Eigen::Vector3d& r) {
    return 0.5 * m * omega * omega * (r - r0).squaredNorm();
  };
  CharacterizeParams params;
  params.fd_scale = 5e-9;
  const auto site = characterize(v, m, r0, params);
  for (int a = 0; a < 3; ++a)
    CHECK(site.frequencies[a] == doctest::Approx(omega).epsilon(1e-6));
  CHECK(site.hessian(0, 0) == doctest::Approx(m * omega * omega).epsilon(1e-6));
  CHECK(site.hessian(0, 1) == doctest::Approx(0.0).scale(m * omega * omega));
}

TEST_CASE("characterize rejects a saddle") {
  const PotentialFn v = [](const Eigen::Vector3d& r) {
    return 1e-27 * (r.x() * r.x() - r.y() * r.y() + r.z() * r.z()) / 1e-14;
  };
  CharacterizeParams params;
  params.fd_scale = 1e-9;
  CHECK_THROWS_AS(characterize(v, rb().mass, Eigen::Vector3d::Zero(), params),
                  std::domain_error);
}

TEST_CASE("sinusoidal lattice: trap frequency and depth follow the recoil chain") {
  const double d = 50e-9;
  const double s = 15.0;
  const double er = recoil_energy(rb(), d);
  const PotentialFn v = [&](const Eigen::Vector3d& r) {
    const auto s2 = [&](double t) { const double w = std::sin(C::pi * t / d); return w * w; };
    return s * er * (s2(r.x()) + s2(r.y()) + s2(r.z()));
  };
  CharacterizeParams params;
  params.fd_scale = d / 16.0;
  params.scan_extent = Eigen::Vector3d::Constant(0.9 * d);
  params.scan_points = 600;
  const auto site = characterize(v, rb().mass, Eigen::Vector3d::Zero(), params);

  const double nu_expected = 2.0 * std::sqrt(s) * er / C::h;  // harmonic expansion
  for (int a = 0; a < 3; ++a) {
    CHECK(to_ordinary_hz(site.frequencies[a]) == doctest::Approx(nu_expected).epsilon(1e-6));
    CHECK(site.depth_per_axis[a] == doctest::Approx(s * er).epsilon(3e-3));
  }
  // working-point chain: 1.78 MHz against the 1.7 MHz target, ~15 E_R at 3.45 MHz
  CHECK(to_ordinary_hz(site.frequencies[0]) == doctest::Approx(1.7782257978759222e6).epsilon(1e-6));
  CHECK(to_ordinary_hz(site.frequencies[0]) == doctest::Approx(1.7e6).epsilon(0.10));
  CHECK(energy_over_h(site.depth_per_axis[0]) == doctest::Approx(3.5e6).epsilon(0.05));
  CHECK(depth_in_recoils(site.depth_per_axis[0], rb(), d) == doctest::Approx(15.0).epsilon(0.01));
}

TEST_CASE("recoil energy values and scaling") {
  CHECK(energy_over_h(recoil_energy(rb(), 50e-9)) == doctest::Approx(230e3).epsilon(0.01));
  CHECK(energy_over_h(recoil_energy(rb(), 385e-9)) == doctest::Approx(3.9e3).epsilon(0.01));
  CHECK(recoil_energy(rb(), 50e-9) / recoil_energy(rb(), 100e-9) ==
        doctest::Approx(4.0).epsilon(1e-12));
  CHECK_THROWS_AS(recoil_energy(rb(), 0.0), std::domain_error);
}

TEST_CASE("depth_in_recoils is linear and anchored") {
  const double d = 50e-9;
  CHECK(depth_in_recoils(0.0, rb(), d) == 0.0);
  const double vd = 3.5e6 * C::h;
  CHECK(depth_in_recoils(vd, rb(), d) == doctest::Approx(15.246).epsilon(1e-3));
  CHECK(depth_in_recoils(2 * vd, rb(), d) ==
        doctest::Approx(2 * depth_in_recoils(vd, rb(), d)).epsilon(1e-14));
}

TEST_CASE("tunneling estimate: scalings, validity flag, band-oracle agreement") {
  const double s = 15.0;
  const auto j50 = tunneling_estimate(s, rb(), 50e-9);
  const auto j385 = tunneling_estimate(s, rb(), 385e-9);
  CHECK(!j50.below_validity);
  CHECK(j50.J / j385.J == doctest::Approx(59.29).epsilon(1e-10));  // (385/50)^2 via E_R
  CHECK(energy_over_h(j50.J) == doctest::Approx(1707.788910344459).epsilon(1e-9));

  CHECK(tunneling_estimate(0.5, rb(), 50e-9).below_validity);

  // monotone decreasing in s at fixed d
  double prev = std::numeric_limits<double>::infinity();
  for (double ss = 1.0; ss <= 40.0; ss += 0.5) {
    const double j = tunneling_estimate(ss, rb(), 50e-9).J;
    CHECK(j < prev);
    CHECK(j > 0);
    prev = j;
  }

  // 1-D plane-wave band-width oracle, within 25% over s in [8, 30]
  for (const double ss : {8.0, 10.0, 15.0, 20.0, 25.0, 30.0}) {
    const double j_band = band_tunneling_in_recoils(ss) * recoil_energy(rb(), 50e-9);
    const double j_est = tunneling_estimate(ss, rb(), 50e-9).J;
    CHECK(std::abs(j_est / j_band - 1.0) < 0.25);
  }
}

TEST_CASE("hubbard scale bundle") {
  const auto h = hubbard_scales(rb(), 50e-9, 15.0 * recoil_energy(rb(), 50e-9));
  CHECK(h.s == doctest::Approx(15.0).epsilon(1e-12));
  CHECK(h.nu_t == doctest::Approx(1.7782257978759222e6).epsilon(1e-9));
  CHECK(h.J_tunnel == doctest::Approx(tunneling_estimate(15.0, rb(), 50e-9).J));
}
