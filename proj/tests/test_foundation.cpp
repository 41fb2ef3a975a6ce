#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "pcwlat/constants.hpp"
#include "pcwlat/special_functions.hpp"
#include "pcwlat/species.hpp"
#include "pcwlat/units.hpp"
#include "reference_values.hpp"

using namespace pcwlat;

TEST_CASE("bessel values against frozen mpmath references") {
  for (const auto& ref : testing::bessel_table) {
    CAPTURE(ref.x);
    CHECK(bessel_j0(ref.x) == doctest::Approx(ref.j0).epsilon(1e-10));
    CHECK(bessel_y0(ref.x) == doctest::Approx(ref.y0).epsilon(1e-10));
    CHECK(bessel_k0(ref.x) == doctest::Approx(ref.k0).epsilon(1e-10));
  }
}

TEST_CASE("series definitions at the origin and small-x anchors") {
  CHECK(bessel_j0(0.0) == 1.0);
  CHECK(bessel_k0(0.01) == doctest::Approx(4.7212447301610949).epsilon(1e-12));
  // small-x series oracle K0 = -ln(x/2) - gamma + O(x^2 ln x)
  const double x = 1e-5;
  CHECK(bessel_k0(x) ==
        doctest::Approx(-std::log(x / 2) - constants::euler_gamma).epsilon(1e-9));
}

TEST_CASE("hankel decomposition H1_0 = J0 + i Y0") {
  for (const double x : {0.01, 0.5, 1.0, 3.0, 12.0, 20.0}) {
    const auto h = hankel1_0(x);
    CHECK(h.real() == bessel_j0(x));
    CHECK(h.imag() == bessel_y0(x));
    const auto via_enum = cyl_bessel(CylKind::H1_0, x);
    CHECK(via_enum == h);
  }
}

TEST_CASE("domain errors at and below zero") {
  CHECK_THROWS_AS(bessel_y0(0.0), std::domain_error);
  CHECK_THROWS_AS(bessel_y0(-1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k0(0.0), std::domain_error);
  CHECK_THROWS_AS(hankel1_0(-2.0), std::domain_error);
  CHECK_THROWS_AS(kernel_asymptote_check(0.0), std::domain_error);
  CHECK_THROWS_AS(bessel_j0(std::nan("")), std::domain_error);
}

TEST_CASE("wronskian J0 Y0' - J0' Y0 = 2/(pi x)") {
  // derivatives by 5-point central stencils on the implementation itself
  const auto d5 = [](auto f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
  };
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(0.1, 30.0);
  for (int i = 0; i < 40; ++i) {
    const double x = u(rng);
    const double h = 1e-3 * std::max(1.0, x);
    const double w = bessel_j0(x) * d5(bessel_y0, x, h) - d5(bessel_j0, x, h) * bessel_y0(x);
    CHECK(w == doctest::Approx(2.0 / (constants::pi * x)).epsilon(1e-8));
  }
}

TEST_CASE("K0 strictly decreasing and positive; |J0| bounded by 1") {
  double prev = std::numeric_limits<double>::infinity();
  for (double lx = -6; lx <= 1.69; lx += 0.05) {
    const double x = std::pow(10.0, lx);
    const double k0 = bessel_k0(x);
    CHECK(k0 > 0.0);
    CHECK(k0 < prev);
    prev = k0;
    CHECK(std::abs(bessel_j0(x)) <= 1.0 + 1e-15);
  }
}

TEST_CASE("kernel asymptote regimes") {
  const auto deep_log = kernel_asymptote_check(1e-4);
  CHECK(deep_log.regime == KernelRegime::logarithmic);
  CHECK(deep_log.ratio == doctest::Approx(1.0).epsilon(1e-4));

  const auto deep_exp = kernel_asymptote_check(20.0);
  CHECK(deep_exp.regime == KernelRegime::exponential);
  CHECK(deep_exp.ratio == doctest::Approx(1.0).epsilon(0.02));

  CHECK(kernel_asymptote_check(1.0).regime == KernelRegime::crossover);
}

TEST_CASE("species lookup and self-consistency") {
  const auto& rb = SpeciesTable::builtin().lookup("Rb87-D2");
  CHECK(to_ordinary_hz(rb.Gamma_a) == doctest::Approx(6.07e6).epsilon(1e-12));
  CHECK(rb.lambda_a == doctest::Approx(780.24e-9).epsilon(1e-4));
  CHECK(rb.mass == doctest::Approx(1.4432e-25).epsilon(1e-4));
  CHECK(rb.omega_a == doctest::Approx(constants::two_pi * constants::c / rb.lambda_a));
  CHECK(rb.k_a * rb.lambda_a == doctest::Approx(constants::two_pi).epsilon(1e-15));
  CHECK(rb.eta == 0.5);
}

TEST_CASE("unknown species error names the available ones") {
  try {
    SpeciesTable::builtin().lookup("Xx99");
    FAIL("expected a lookup error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("Xx99") != std::string::npos);
    CHECK(msg.find("Rb87-D2") != std::string::npos);
  }
}

TEST_CASE("species invariants rejected on construction") {
  CHECK_THROWS_AS(make_species("bad", -1e-9, 6e6, 1e-25, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(make_species("bad", 780e-9, 0.0, 1e-25, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(make_species("bad", 780e-9, 6e6, 1e-25, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(make_species("bad", 780e-9, 6e6, -1e-25, 0.5), std::invalid_argument);
}

TEST_CASE("unit conversions round-trip at machine precision") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-15, 15);
  for (int i = 0; i < 200; ++i) {
    const double nu = std::pow(10.0, u(rng));
    const double back = to_ordinary_hz(to_angular(nu));
    CHECK(std::abs(back - nu) <= 4e-16 * nu);
  }
  CHECK(energy_over_h(constants::h) == 1.0);
}

TEST_CASE("constants header matches the versioned data file") {
  std::ifstream in(std::string(PCWLAT_TEST_DATA_DIR) + "/constants.json");
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  CHECK(j.at("version").get<std::string>() == constants::version);
  CHECK(j.at("c_m_per_s").get<double>() == constants::c);
  CHECK(j.at("h_J_s").get<double>() == constants::h);
  CHECK(j.at("hbar_J_s").get<double>() == constants::hbar);
  CHECK(j.at("amu_kg").get<double>() == constants::amu);
  CHECK(j.at("euler_gamma").get<double>() == constants::euler_gamma);
  CHECK(constants::hbar == constants::h / constants::two_pi);
}
