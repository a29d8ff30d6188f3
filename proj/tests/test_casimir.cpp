#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spstab/casimir.hpp"
#include "spstab/error.hpp"
#include "spstab/quadrature.hpp"

using namespace spstab;

namespace {

// Reference values for Fermi-Dirac with C = 1, eps = 1, computed with 40-digit
// arithmetic from the polylogarithm forms
//   f(s) = -(2 pi)^{3/2} Li_{3/2}(-e^{-s}),  F(s) = -(2 pi)^{3/2} Li_{5/2}(-e^{-s}),
// and F*(-lambda) = -lambda s - F(s) at s = f^{-1}(lambda).
struct FdPoint {
  double s, f, F;
};
constexpr FdPoint kFermiDirac[] = {
    {-10.0, 379.32395286956993443, 1590.7909408107431387},
    {-2.0, 44.472508714512005233, 65.603653005198099832},
    {0.0, 12.050767188980242194, 13.658059996915673851},
    {1.0, 5.1626459004521671349, 5.4599927960985136878},
    {2.0, 2.036401151352985296, 2.0828352370423012494},
    {3.0, 0.77068677791858374687, 0.77734739969532967823},
};
struct FdInverse {
  double lambda, s, fstar;
};
constexpr FdInverse kFermiDiracInverse[] = {
    {0.001, 9.6645484302258455923, -0.010664559654407674445},
    {0.37, 3.7427646986132371276, -1.7563588574466043099},
    {1.0, 2.7343871274364283944, -3.7455980469995108569},
    {20.0, -0.68019476082560074687, -10.783730099500362448},
};

std::vector<EquationOfState> families() {
  return {EquationOfState::boltzmann(1.0), EquationOfState::boltzmann(2.5),
          EquationOfState::fermi_dirac(1.0, 1.0), EquationOfState::fermi_dirac(0.5, 3.0),
          EquationOfState::power_cutoff(2.0, 1.0), EquationOfState::power_cutoff(1.5, 2.5)};
}

}  // namespace

TEST_CASE("quadrature against closed forms") {
  const auto r = integrate([](double x) { return std::exp(-x) * std::sin(3 * x); }, 0.0, 20.0, 1e-12);
  const double exact = (3.0 - std::exp(-20.0) * (3 * std::cos(60.0) + std::sin(60.0))) / 10.0;
  CHECK(r.value == doctest::Approx(exact).epsilon(1e-12));
  CHECK(r.error <= 1e-11);
  const auto g = gauss_legendre(10);
  double s = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], 18);
  CHECK(s == doctest::Approx(2.0 / 19.0).epsilon(1e-14));
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0,
                            1e-14, 0.0, 5),
                  NumericalError);
}

TEST_CASE("Boltzmann closed forms") {
  const auto b = EquationOfState::boltzmann(1.0);
  CHECK(b.f(0.0) == 1.0);
  CHECK(b.F(0.0) == 1.0);
  CHECK(b.f_inverse(1.0) == doctest::Approx(0.0).epsilon(1e-12));
  for (double l : {1e-6, 0.01, 0.5, 3.0, 100.0}) {
    CHECK(std::abs(b.f_inverse(l) + std::log(l)) <= 1e-12);
    CHECK(b.F_star(-l) == doctest::Approx(l * std::log(l) - l).epsilon(1e-11));
  }
  CHECK(b.F_star(-1.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(b.F_star(0.0) == 0.0);
  const double lam = std::exp(-1.0);
  CHECK(std::abs(b.F_star(-lam) + lam * 1.0 + b.F(1.0)) <= 1e-9);

  const auto b2 = EquationOfState::boltzmann(2.0);
  for (double l : {1e-3, 0.2, 7.0}) {
    // F*(-lambda) = (lambda ln lambda - lambda) / beta
    CHECK(b2.F_star(-l) == doctest::Approx((l * std::log(l) - l) / 2.0).epsilon(1e-11));
  }
}

TEST_CASE("power-cutoff closed forms") {
  const auto p = EquationOfState::power_cutoff(2.0, 1.0);
  CHECK(p.f(3.0) == 0.0);
  CHECK(p.f(0.0) == 2.0);
  CHECK(p.F(2.0) == 0.0);
  CHECK(p.F(0.0) == 2.0);
  CHECK(p.f_inverse(2.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.cutoff() == 2.0);
  // F*(-lambda) = -s0 lambda + lambda^{1 + 1/q} / (1 + 1/q)
  for (double q : {1.0, 2.0, 3.5}) {
    const auto pq = EquationOfState::power_cutoff(2.0, q);
    for (double l : {1e-8, 0.3, 1.0, 40.0}) {
      const double exact = -2.0 * l + std::pow(l, 1.0 + 1.0 / q) / (1.0 + 1.0 / q);
      CHECK(pq.F_star(-l) == doctest::Approx(exact).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(EquationOfState::power_cutoff(2.0, 0.5), DomainError);
  CHECK_THROWS_AS(EquationOfState::power_cutoff(std::numeric_limits<double>::infinity(), 1.0),
                  DomainError);
}

TEST_CASE("Fermi-Dirac against the high-precision reference") {
  const auto fd = EquationOfState::fermi_dirac(1.0, 1.0);
  for (const auto& p : kFermiDirac) {
    CAPTURE(p.s);
    CHECK(fd.f(p.s) == doctest::Approx(p.f).epsilon(1e-9));
    CHECK(fd.F(p.s) == doctest::Approx(p.F).epsilon(1e-9));
  }
  for (const auto& p : kFermiDiracInverse) {
    CAPTURE(p.lambda);
    CHECK(std::abs(fd.f_inverse(p.lambda) - p.s) <= 1e-9);
    CHECK(std::abs(fd.table().inverse(p.lambda) - p.s) <= 1e-9);
    CHECK(fd.F_star(-p.lambda) == doctest::Approx(p.fstar).epsilon(1e-9));
  }
  CHECK(fd.f(fd.f_inverse(0.37)) == doctest::Approx(0.37).epsilon(1e-9));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(EquationOfState::boltzmann(0.0), DomainError);
  CHECK_THROWS_AS(EquationOfState::fermi_dirac(-1.0, 1.0), DomainError);
  CHECK_THROWS_AS(EquationOfState::fermi_dirac(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(parse_eos_kind("maxwell"), DomainError);
  CHECK(parse_eos_kind(to_string(EosKind::fermi_dirac)) == EosKind::fermi_dirac);
  const auto b = EquationOfState::boltzmann(1.0);
  CHECK_THROWS_AS(b.f_inverse(0.0), DomainError);
  CHECK_THROWS_AS(b.f_inverse(-1.0), DomainError);
  CHECK_THROWS_AS(b.F_star(0.5), DomainError);
}

TEST_CASE("casimir_sum") {
  const auto b = EquationOfState::boltzmann(1.0);
  const std::vector<double> zeros(5, 0.0);
  CHECK(casimir_sum(b, zeros) == 0.0);
  CHECK(casimir_sum(b, std::vector<double>{1.0}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(casimir_sum(b, std::vector<double>{0.5, -1e-3}), DomainError);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (const auto& eos : families()) {
    std::vector<double> lambda(12);
    for (double& l : lambda) l = u(rng);
    const double a = casimir_sum(eos, lambda);
    std::shuffle(lambda.begin(), lambda.end(), rng);
    CHECK(casimir_sum(eos, lambda) == doctest::Approx(a).epsilon(1e-14));
  }
}

TEST_CASE("casimir class validation") {
  for (const auto& eos : families()) {
    const auto r = validate_casimir_class(eos);
    CAPTURE(eos.describe());
    CAPTURE(r.detail);
    CHECK(r.pass());
  }
  // negative controls
  const auto wiggly = validate_casimir_class(
      [](double s) { return std::exp(-s) * (1.0 + 0.5 * std::sin(5.0 * s)); },
      std::numeric_limits<double>::infinity());
  CHECK_FALSE(wiggly.monotone);
  const auto bounded = validate_casimir_class(
      [](double s) { return 1.0 / (1.0 + std::exp(s)); }, std::numeric_limits<double>::infinity());
  CHECK_FALSE(bounded.monotone);
  const auto slow = validate_casimir_class(
      [](double s) { return s < 0.0 ? 1.0 - s : 1.0 / (1.0 + s); },
      std::numeric_limits<double>::infinity());
  CHECK_FALSE(slow.decay);
  const auto negative_cutoff = validate_casimir_class(
      [](double s) { return s < -1.0 ? -1.0 - s : 0.0; }, -1.0);
  CHECK_FALSE(negative_cutoff.support);
}

TEST_CASE("conjugacy inequality and its equality case") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& eos : families()) {
    CAPTURE(eos.describe());
    double worst = 1.0;
    for (int i = 0; i < 300; ++i) {
      const double mu = -4.0 + 14.0 * u(rng);
      const double lambda = std::exp(-25.0 + 30.0 * u(rng));
      const double gap = eos.F_star(-lambda) + lambda * mu + eos.F(mu);
      worst = std::min(worst, gap);
      const double fm = eos.f(mu);
      if (fm > 0.0) CHECK(std::abs(eos.F_star(-fm) + fm * mu + eos.F(mu)) <= 1e-8);
    }
    CHECK(worst >= -1e-10);
  }
}

TEST_CASE("F is convex and -F' = f") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5.0, 8.0);
  for (const auto& eos : families()) {
    CAPTURE(eos.describe());
    for (int i = 0; i < 100; ++i) {
      const double a = u(rng), b = u(rng);
      CHECK(eos.F(0.5 * (a + b)) <= 0.5 * (eos.F(a) + eos.F(b)) + 1e-10);
    }
    const double d = 1e-4;
    for (double s = -4.0; s <= 6.0; s += 0.37) {
      if (std::abs(s - eos.cutoff()) < 2 * d) continue;
      const double fd = -(eos.F(s + d) - eos.F(s - d)) / (2 * d);
      const double f = eos.f(s);
      CHECK(std::abs(fd - f) <= 1e-6 * std::max(1.0, f));
    }
  }
}

TEST_CASE("F(s) + b s is bounded below for b > 1 on s <= 0") {
  for (const auto& eos : families()) {
    for (double b : {1.5, 3.0, 10.0}) {
      double lowest = std::numeric_limits<double>::infinity();
      double at = 0.0;
      for (double s = -60.0; s <= 0.0; s += 0.25) {
        const double v = eos.F(s) + b * s;
        if (v < lowest) {
          lowest = v;
          at = s;
        }
      }
      CAPTURE(eos.describe());
      CHECK(std::isfinite(lowest));
      // the minimum sits strictly inside the sample, so the left end is rising again
      CHECK(at > -60.0);
    }
  }
}

TEST_CASE("table inverse round trip") {
  for (const auto& eos : families()) {
    CAPTURE(eos.describe());
    const auto& table = eos.table();
    for (double x = -60.0; x <= 6.0; x += 0.77) {
      const double lambda = std::exp(x);
      const double s = table.inverse(lambda);
      CHECK(eos.f(s) == doctest::Approx(lambda).epsilon(1e-10));
      CHECK(std::abs(s - eos.f_inverse(lambda)) <= 1e-9 * std::max(1.0, std::abs(s)));
    }
  }
}

TEST_CASE("closed-form conjugate agrees with quadrature of the inverse") {
  for (const auto& eos : families()) {
    CAPTURE(eos.describe());
    const auto& table = eos.table();
    // below, inside and above the tabulated range, on and off the nodes
    for (double x = -80.0; x <= 8.5; x += 0.37) {
      const double lambda = std::exp(x);
      const double closed = table.conjugate(lambda);
      const double quad = table.integral(lambda);
      CAPTURE(lambda);
      CHECK(std::abs(closed - quad) <= 1e-11 * (1.0 + std::abs(closed)));
    }
    CHECK(table.integral(0.0) == 0.0);
    CHECK(table.conjugate(0.0) == 0.0);
  }
}

TEST_CASE("copies share one conjugate table") {
  const auto a = EquationOfState::fermi_dirac(1.0, 1.0);
  const auto b = a;
  CHECK(&a.table() == &b.table());
  CHECK(a.F_star(-0.5) == b.F_star(-0.5));
}
