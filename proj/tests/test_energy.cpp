#include <doctest.h>

#include "sps/errors.hpp"
#include "sps/coulomb.hpp"
#include "sps/energy.hpp"

#include <cmath>
#include <random>

using namespace sps;

namespace {

double rel(double got, double want) { return std::abs(got / want - 1.0); }

// Gaussian moments for u = e^{-r^2/2}
const double A_gauss = 1.5 * std::pow(M_PI, 1.5);
const double B_gauss = std::pow(M_PI, 1.5) / (2.0 * std::sqrt(2.0));
const double C3_gauss = std::pow(M_PI / 2.0, 1.5);       // int u^4
const double C2_gauss = std::pow(2.0 * M_PI / 3.0, 1.5); // int u^3

GridPtr fine() { return make_grid(4096, 40.0, 2.0); }

RadialField gaussian(const GridPtr &g) {
  return RadialField::sample(g, [](double r) { return std::exp(-r * r / 2); });
}

/// sum of Gaussians with random weights and widths
RadialField random_smooth(const GridPtr &g, std::mt19937 &rng) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), width(0.5, 3.0);
  double a[3], s[3];
  for (int j = 0; j < 3; ++j) {
    a[j] = amp(rng);
    s[j] = width(rng);
  }
  return RadialField::sample(g, [&](double r) {
    double v = 0.0;
    for (int j = 0; j < 3; ++j)
      v += a[j] * std::exp(-r * r / (s[j] * s[j]));
    return v;
  });
}

double dot_nodes(const RadialField &a, const RadialField &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

} // namespace

TEST_CASE("breakdown of the zero field") {
  auto g = make_grid(64, 10.0, 2.0);
  const auto e = compute_breakdown(RadialField(g), 3.0, 1.0);
  CHECK(e.A == 0.0);
  CHECK(e.B == 0.0);
  CHECK(e.C == 0.0);
  CHECK(e.I == 0.0);
  CHECK(pohozaev_residual(e).absolute == 0.0);
  CHECK(pohozaev_residual(e).normalized == 0.0);
  CHECK(nehari_residual(e).normalized == 0.0);
  CHECK(discrete_gradient(RadialField(g), 3.0, 1.0).max_abs() == 0.0);
  CHECK_THROWS_AS(sobolev_ratio(e), DomainError);
}

TEST_CASE("gaussian moments") {
  const auto u = gaussian(fine());
  CHECK(rel(dirichlet_energy(u), A_gauss) < 1e-5);
  CHECK(rel(lp_integral(u, 3.0), C2_gauss) < 1e-5);
  CHECK(rel(lp_integral(u, 4.0), C3_gauss) < 1e-5);
  const auto e = compute_breakdown(u, 3.0, 1.0);
  CHECK(rel(e.B, B_gauss) < 1e-5);
  CHECK(rel(e.I, A_gauss / 2 + B_gauss / 4 - C3_gauss / 4) < 1e-5);
  CHECK(rel(e.M, A_gauss + B_gauss) < 1e-5);
  CHECK(rel(e.normE, std::sqrt(A_gauss + std::sqrt(B_gauss))) < 1e-5);
}

TEST_CASE("exponent and coupling are validated") {
  const auto u = gaussian(make_grid(64, 10.0, 2.0));
  CHECK_THROWS_AS(compute_breakdown(u, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(compute_breakdown(u, 5.5, 1.0), ConfigError);
  CHECK_THROWS_AS(compute_breakdown(u, 3.0, 0.0), ConfigError);
  CHECK_NOTHROW(compute_breakdown(u, 5.0, 1.0));
}

TEST_CASE("pohozaev residual of a non-solution") {
  const auto u = gaussian(fine());
  const double want = 0.5 * A_gauss + 1.25 * B_gauss - 0.75 * C3_gauss;
  const auto r = pohozaev_residual(u, 3.0, 1.0);
  CHECK(rel(r.absolute, want) < 1e-5);
  CHECK(std::abs(r.absolute - 5.16062) < 1e-4);
  CHECK(r.normalized > 0.5);
}

TEST_CASE("nehari residual homogeneity") {
  const auto g = fine();
  const auto u = gaussian(g);
  const double mu = 10.0;
  auto predicted = [&](double a) {
    return a * a * A_gauss + std::pow(a, 4) * (B_gauss - mu * C3_gauss);
  };
  for (double a : {0.5, 0.687, 1.0, 2.0}) {
    const double got = nehari_residual(a * u, 3.0, mu).absolute;
    CHECK(std::abs(got - predicted(a)) < 1e-4 * std::abs(a * a * A_gauss));
  }
  CHECK(nehari_residual(0.5 * u, 3.0, mu).absolute > 0.0);
  CHECK(nehari_residual(1.0 * u, 3.0, mu).absolute < 0.0);
}

TEST_CASE("discrete gradient matches central differences") {
  auto g = make_grid(256, 12.0, 2.0);
  std::mt19937 rng(12345);
  const double eps = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const auto u = random_smooth(g, rng);
    const auto v = random_smooth(g, rng);
    const double p = trial % 2 == 0 ? 3.0 : 2.5;
    const double mu = 0.5 + 0.1 * trial;
    const double fd = (discrete_energy(u + eps * v, p, mu) -
                       discrete_energy(u - eps * v, p, mu)) /
                      (2.0 * eps);
    const double an = dot_nodes(discrete_gradient(u, p, mu), v);
    CAPTURE(trial);
    CHECK(std::abs(fd - an) <= 1e-6 * std::abs(an));
  }
}

TEST_CASE("virial path") {
  const auto u = gaussian(fine());
  SUBCASE("closed form and derivative") {
    const auto e = compute_breakdown(u, 3.0, 1.0);
    const std::vector<double> ts{0.5, 1.0, 2.0};
    const auto path = virial_path(e, ts);
    for (const auto &pt : path.points) {
      const double want = std::pow(pt.t, 3) * e.J -
                          std::pow(pt.t, 5) * e.mu * e.C / 4.0;
      CHECK(pt.f == doctest::Approx(want).epsilon(1e-13));
    }
    const double h = 1e-5;
    const std::vector<double> near{1.0 - h, 1.0 + h};
    const auto fd = virial_path(e, near);
    const double slope = (fd.points[1].f - fd.points[0].f) / (2 * h);
    CHECK(virial_derivative(e).absolute ==
          doctest::Approx(slope).epsilon(1e-8));
    REQUIRE(path.argmax.has_value());
  }
  SUBCASE("p = 2 scales as t^3") {
    const auto e = compute_breakdown(u, 2.0, 1.0);
    const std::vector<double> ts{0.5, 2.0, 3.0};
    const auto path = virial_path(e, ts);
    for (const auto &pt : path.points)
      CHECK(pt.f == doctest::Approx(std::pow(pt.t, 3) * e.I).epsilon(1e-13));
    CHECK_FALSE(path.argmax.has_value());
  }
  SUBCASE("zero field and invalid t") {
    auto g = make_grid(64, 10.0, 2.0);
    const std::vector<double> ts{0.5, 1.0};
    for (const auto &pt : virial_path(RadialField(g), 3.0, 1.0, ts).points)
      CHECK(pt.f == 0.0);
    const std::vector<double> bad{0.0};
    CHECK_THROWS_AS(virial_path(RadialField(g), 3.0, 1.0, bad), DomainError);
    CHECK_THROWS_AS(virial_path(RadialField(g), 3.0, 1.0, {}), DomainError);
  }
}

TEST_CASE("sobolev ratio") {
  const auto u = gaussian(fine());
  SUBCASE("dilation invariance") {
    const double rho = sobolev_ratio(u, 3.0);
    for (double t : {0.5, 2.0})
      CHECK(rel(sobolev_ratio(rescale_field(u, t).field, 3.0), rho) < 1e-3);
  }
  SUBCASE("amplitude dependence") {
    for (double p : {2.0, 2.5, 3.0, 4.0}) {
      const auto e = compute_breakdown(u, p, 1.0);
      const double want =
          std::pow(2.0, p + 1.0) /
          std::pow((4.0 * e.A + 16.0 * e.B) / (e.A + e.B), (2.0 * p - 1.0) / 3.0);
      CAPTURE(p);
      CHECK(rel(sobolev_ratio(2.0 * u, p) / sobolev_ratio(u, p), want) < 1e-12);
    }
  }
}
