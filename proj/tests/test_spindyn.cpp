#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pcwlat/constants.hpp"
#include "pcwlat/spin_dynamics.hpp"
#include "pcwlat/units.hpp"

using namespace pcwlat;
namespace C = pcwlat::constants;

namespace {

SpinModel bare_model(int n) {
  SpinModel m;
  m.sites = Eigen::MatrixX2d::Zero(n, 2);
  for (int i = 0; i < n; ++i) m.sites(i, 0) = i * 316e-9;
  m.Jz = Eigen::MatrixXd::Zero(n, n);
  m.Jxy = Eigen::MatrixXd::Zero(n, n);
  m.gamma_z = Eigen::MatrixXd::Zero(n, n);
  m.gamma_xy = Eigen::MatrixXd::Zero(n, n);
  return m;
}

Eigen::MatrixXcd ket_rho(const Eigen::VectorXcd& psi) {
  return psi * psi.adjoint();
}

}  // namespace

TEST_CASE("hamiltonian: empty model, pair element, U(1) symmetry") {
  auto m = bare_model(2);
  CHECK(build_hamiltonian(m).cwiseAbs().maxCoeff() == 0.0);

  const double j = 2.7e5;
  m.Jxy(0, 1) = m.Jxy(1, 0) = j;
  const auto h = build_hamiltonian(m);
  // basis order g1g1, g1g2, g2g1, g2g2: exchange element between |g2g1> and
  // |g1g2> is 2 Jxy under the ordered-pair convention
  CHECK(h(1, 2).real() == doctest::Approx(2 * j).epsilon(1e-14));
  CHECK(h(2, 1).real() == doctest::Approx(2 * j).epsilon(1e-14));
  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(h(0, 0) == std::complex<double>(0.0));

  // random XXZ model commutes with total sigma^z
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  auto m3 = bare_model(3);
  for (int i = 0; i < 3; ++i)
    for (int k = i + 1; k < 3; ++k) {
      m3.Jxy(i, k) = m3.Jxy(k, i) = u(rng);
      m3.Jz(i, k) = m3.Jz(k, i) = u(rng);
    }
  const auto h3 = build_hamiltonian(m3);
  Eigen::MatrixXcd sz_tot = Eigen::MatrixXcd::Zero(8, 8);
  Eigen::Matrix2cd sz1;
  sz1 << 1, 0, 0, -1;
  for (int i = 0; i < 3; ++i) sz_tot += embed_site_operator(sz1, i, 3);
  CHECK((h3 * sz_tot - sz_tot * h3).cwiseAbs().maxCoeff() < 1e-9);

  // diagonal Jxy enters as a local sigma^z shift, reported separately
  auto mo = bare_model(1);
  mo.Jxy(0, 0) = 4.4e5;
  CHECK(build_hamiltonian(mo)(0, 0).real() == doctest::Approx(-2.2e5));
  CHECK(build_hamiltonian(mo, false).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("density matrix validation and product states") {
  const auto rho = DensityMatrix::product_state("g1,g1,g1");
  CHECK(rho.n_spins() == 3);
  CHECK(total_sz(rho.rho(), 3) == doctest::Approx(3.0));
  CHECK(purity(rho.rho()) == doctest::Approx(1.0));

  const auto mixed_up = DensityMatrix::product_state("g2,g1");
  CHECK(expect_sz(mixed_up.rho(), 0, 2) == doctest::Approx(-1.0));
  CHECK(expect_sz(mixed_up.rho(), 1, 2) == doctest::Approx(1.0));

  CHECK_THROWS_AS(DensityMatrix::product_state("g1,up"), std::invalid_argument);
  CHECK_THROWS_AS(DensityMatrix::product_state(""), std::invalid_argument);

  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
  bad(0, 0) = 0.7;
  bad(1, 1) = 0.7;
  CHECK_THROWS_AS(DensityMatrix(1, bad), std::invalid_argument);  // trace 1.4
  Eigen::MatrixXcd nonherm = Eigen::MatrixXcd::Zero(2, 2);
  nonherm(0, 0) = 1.0;
  nonherm(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix(1, nonherm), std::invalid_argument);

  // fully mixed state has zero magnetization
  Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Identity(4, 4) / 4.0;
  const DensityMatrix dm(2, mixed);
  CHECK(total_sz(dm.rho(), 2) == doctest::Approx(0.0));
  CHECK(purity(dm.rho()) == doctest::Approx(0.25));
}

TEST_CASE("free evolution is the identity") {
  const auto rho0 = DensityMatrix::product_state("g2,g1");
  const auto m = bare_model(2);
  const auto res = evolve(rho0, m, Eigen::VectorXd::LinSpaced(5, 0.0, 1e-3));
  CHECK(res.sz(4, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(res.sz(4, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.purity(4) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!res.guard_violated);
}

TEST_CASE("two-spin exchange: full transfer at pi/(4 Jxy), period pi/(2 Jxy)") {
  auto m = bare_model(2);
  const double j = to_angular(1e6);
  m.Jxy(0, 1) = m.Jxy(1, 0) = j;
  const auto rho0 = DensityMatrix::product_state("g2,g1");

  const double t_transfer = C::pi / (4 * j);
  const double t_period = C::pi / (2 * j);
  Eigen::VectorXd ts(4);
  ts << 0.0, t_transfer, t_period, 50.0 / j;
  const auto res = evolve(rho0, m, ts);

  // at t_transfer the excitation has moved entirely to site 0
  CHECK(res.sz(1, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(res.sz(1, 1) == doctest::Approx(-1.0).epsilon(1e-7));
  // one full period restores the initial state to 0.1%
  CHECK(res.sz(2, 0) == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(res.sz(2, 1) == doctest::Approx(1.0).epsilon(1e-3));
  // refine: locate the period as the first full return of site 1
  const int nscan = 1201;
  Eigen::VectorXd tg = Eigen::VectorXd::LinSpaced(nscan, 0.0, 1.2 * t_period);
  const auto scan = evolve(rho0, m, tg);
  int best = -1;
  for (int i = 0; i < nscan; ++i) {
    if (tg[i] < 0.6 * t_period) continue;
    if (best < 0 || scan.sz(i, 1) > scan.sz(best, 1)) best = i;
  }
  CHECK(tg[best] == doctest::Approx(t_period).epsilon(1e-3));

  // conservation over the long window
  CHECK(res.max_trace_dev < 1e-9);
  CHECK(res.max_herm_dev < 1e-9);
  for (int i = 0; i < ts.size(); ++i)
    CHECK(res.total_sz[i] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("coherent runs conserve energy and total sigma^z to 1e-9") {
  auto m = bare_model(3);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(1e5, 1e6);
  for (int i = 0; i < 3; ++i)
    for (int k = i + 1; k < 3; ++k) {
      m.Jxy(i, k) = m.Jxy(k, i) = u(rng);
      m.Jz(i, k) = m.Jz(k, i) = u(rng);
    }
  const auto h = build_hamiltonian(m);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
  psi[1] = std::sqrt(0.5);  // g1 g1 g2
  psi[2] = std::complex<double>(0.3, 0.4) / std::sqrt(0.5) * 0.5;
  psi[4] = std::sqrt(1.0 - 0.5 - std::norm(psi[2]));
  const DensityMatrix rho0(3, ket_rho(psi));

  const double jscale = 1e6;
  const auto res = evolve(rho0, m, Eigen::VectorXd::LinSpaced(8, 0.0, 50.0 / jscale),
                          {1e-11, true, 1e-9});
  const double e0 = (h * rho0.rho()).trace().real();
  const double sz0 = total_sz(rho0.rho(), 3);
  for (size_t i = 0; i < res.states.size(); ++i) {
    CHECK(std::abs((h * res.states[i]).trace().real() - e0) < 1e-9 * jscale);
    CHECK(std::abs(total_sz(res.states[i], 3) - sz0) < 1e-9);
  }
  CHECK(res.max_trace_dev < 1e-9);
  CHECK(res.max_herm_dev < 1e-9);
}

TEST_CASE("collective decay: bright state at 2 gamma, dark state dark") {
  auto m = bare_model(2);
  const double g = to_angular(1e6);
  m.gamma_xy.setConstant(2, 2, g);  // fully collective jump operator

  Eigen::VectorXcd sym = Eigen::VectorXcd::Zero(4), asym = sym;
  // one-excitation states: |g2 g1> = index 2, |g1 g2> = index 1
  sym[1] = sym[2] = 1.0 / std::sqrt(2.0);
  asym[1] = 1.0 / std::sqrt(2.0);
  asym[2] = -asym[1];

  const double t1 = 0.3 / g;
  Eigen::VectorXd ts = Eigen::VectorXd::LinSpaced(4, 0.0, t1);

  const auto bright = evolve(DensityMatrix(2, ket_rho(sym)), m, ts);
  // excited population (total sz rises from 0 toward 2 as g2 decays to g1)
  for (int i = 1; i < ts.size(); ++i) {
    const double pop = 0.5 * (2.0 - bright.total_sz[i]);  // excitations left
    CHECK(pop == doctest::Approx(std::exp(-2 * g * ts[i])).epsilon(0.01));
  }

  const auto dark = evolve(DensityMatrix(2, ket_rho(asym)), m, ts);
  for (int i = 1; i < ts.size(); ++i) {
    const double pop = 0.5 * (2.0 - dark.total_sz[i]);
    CHECK(pop == doctest::Approx(1.0).epsilon(1e-3 * g * t1));  // rate < 1e-3 gamma
  }
}

TEST_CASE("single-spin decay at rate gamma and positivity guard") {
  auto m = bare_model(1);
  const double g = to_angular(2e6);
  m.gamma_xy(0, 0) = g;
  const auto rho0 = DensityMatrix::product_state("g2");
  Eigen::VectorXd ts = Eigen::VectorXd::LinSpaced(6, 0.0, 2.0 / g);
  const auto res = evolve(rho0, m, ts, {1e-10, true, 1e-9});
  for (int i = 0; i < ts.size(); ++i) {
    const double pop = 0.5 * (1.0 - res.total_sz[i]);
    CHECK(pop == doctest::Approx(std::exp(-g * ts[i])).epsilon(1e-6));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(res.states[i], Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-8);
  }
}

TEST_CASE("liouvillian spectrum of a dissipative model is stable") {
  auto m = bare_model(2);
  const double g = to_angular(1e6);
  // dispersive-style correlated dissipation, PSD: gamma_ij = g * J0-like profile
  m.gamma_xy << g,  0.6 * g, 0.6 * g, g;
  m.Jxy << 0.0, 2e5, 2e5, 0.0;
  m.Jz << 0.0, 1e5, 1e5, 0.0;
  const auto L = build_liouvillian(m);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(L);
  CHECK(es.eigenvalues().real().maxCoeff() < 1e-10 * g);

  // and the evolution keeps the state physical
  Eigen::VectorXcd sym = Eigen::VectorXcd::Zero(4);
  sym[1] = sym[2] = 1.0 / std::sqrt(2.0);
  const auto res = evolve(DensityMatrix(2, ket_rho(sym)), m,
                          Eigen::VectorXd::LinSpaced(5, 0.0, 3.0 / g), {1e-10, true, 1e-9});
  for (const auto& rho : res.states) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> pos(rho, Eigen::EigenvaluesOnly);
    CHECK(pos.eigenvalues().minCoeff() > -1e-8);
  }
  CHECK(res.max_trace_dev < 1e-9);
}

TEST_CASE("correlators and observables") {
  const auto rho = DensityMatrix::product_state("g2,g1");
  const auto corr = correlation_matrix(rho.rho(), 2);
  CHECK((corr - corr.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  // <sigma_1^+ sigma_1^-> = population of g2 on site 1... site 0 here is g2
  CHECK(correlator_pm(rho.rho(), 0, 0, 2).real() == doctest::Approx(0.0));
  CHECK(correlator_pm(rho.rho(), 1, 1, 2).real() == doctest::Approx(1.0));
}

TEST_CASE("stiffness bail-out raises a diagnostic error") {
  auto m = bare_model(1);
  m.gamma_xy(0, 0) = 1e16;  // decay vastly faster than the requested window
  const auto rho0 = DensityMatrix::product_state("g2");
  Eigen::VectorXd ts(2);
  ts << 0.0, 1.0;
  CHECK_THROWS_AS(evolve(rho0, m, ts), std::runtime_error);
}

TEST_CASE("liouvillian of a dispersive-regime built model is spectrally stable") {
  // full chain: lambda scheme above the band edge -> dissipative spin model
  const double kOmegaC = C::two_pi * C::c / 780e-9;
  const double kD = 316e-9;
  const auto patch = make_band_patch(kOmegaC, 1.8, 0.3e-6, kD);
  const double delta = patch.A / std::pow(10 * kD, 2);
  const double omega_e = kOmegaC + to_angular(300e12);
  const double omega_g2 = to_angular(6.8e9);
  const auto scheme = make_lambda_scheme(to_angular(1e8), to_angular(1e9), kOmegaC + delta,
                                         kOmegaC + delta - omega_g2, 0.0, omega_g2, omega_e,
                                         kOmegaC);
  Eigen::MatrixX2d sites(2, 2);
  sites << 0, 0, kD, 0;
  const auto& rbs = SpeciesTable::builtin().lookup("Rb87-D2");
  const auto model = build_spin_model(rbs, scheme, patch, sites);
  REQUIRE(model.regime_xy == CouplingRegime::dispersive);
  const auto L = build_liouvillian(model);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(L);
  const double scale = model.gamma_xy.cwiseAbs().maxCoeff();
  CHECK(es.eigenvalues().real().maxCoeff() <= 1e-10 * scale);
}
