#include <doctest.h>

#include "sps/coulomb.hpp"
#include "sps/energy.hpp"

#include <cmath>

using namespace sps;

namespace {

double rel(double got, double want) { return std::abs(got / want - 1.0); }

RadialField gaussian(const GridPtr &g) {
  return RadialField::sample(g, [](double r) { return std::exp(-r * r / 2); });
}

/// phi for u^2 = e^{-r^2}
double gaussian_phi(double r) {
  return r == 0.0 ? 0.5 : std::sqrt(M_PI) / 4.0 * std::erf(r) / r;
}

/// phi for rho = e^{-r}
double exponential_phi(double r) {
  return (2.0 - std::exp(-r) * (r * r + 2.0 * r + 2.0)) / r +
         std::exp(-r) * (r + 1.0);
}

} // namespace

TEST_CASE("green kernel") {
  auto g = make_grid(32, 4.0, 2.0);
  auto k = green_kernel(*g);
  REQUIRE(k.size() == g->size());
  CHECK(k[0] == doctest::Approx(2.0 / g->r(1)));
  for (std::size_t i = 1; i < k.size(); ++i) {
    CHECK(k[i] == doctest::Approx(1.0 / g->r(i)));
    CHECK(k[i] < k[i - 1]);
  }
}

TEST_CASE("hartree_potential") {
  SUBCASE("zero field") {
    auto g = make_grid(64, 10.0, 2.0);
    CHECK(hartree_potential(RadialField(g)).max_abs() == 0.0);
    CHECK(coulomb_energy(RadialField(g)) == 0.0);
  }
  SUBCASE("gaussian density") {
    auto g = make_grid(4096, 40.0, 2.0);
    const auto phi = hartree_potential(gaussian(g));
    double err = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i)
      err = std::max(err, rel(phi[i], gaussian_phi(g->r(i))));
    CHECK(err < 1e-6);
    CHECK(std::abs(phi[0] - 0.5) < 1e-6);
  }
  SUBCASE("exponential density") {
    // r_max (i/n)^2 = 1 at i = 512
    auto g = make_grid(4096, 64.0, 2.0);
    REQUIRE(g->r(512) == doctest::Approx(1.0).epsilon(1e-15));
    RadialField rho =
        RadialField::sample(g, [](double r) { return std::exp(-r); });
    const auto phi = potential_of_density(rho);
    CHECK(std::abs(phi[512] - (2.0 - 3.0 / std::exp(1.0))) < 1e-5);
    double err = 0.0;
    for (std::size_t i = 1; i < g->size(); ++i)
      err = std::max(err, rel(phi[i], exponential_phi(g->r(i))));
    CHECK(err < 1e-5);
  }
}

TEST_CASE("coulomb_energy") {
  auto g = make_grid(4096, 40.0, 2.0);
  const auto u = gaussian(g);
  const double B = coulomb_energy(u);
  SUBCASE("gaussian closed form") {
    CHECK(rel(B, std::pow(M_PI, 1.5) / (2.0 * std::sqrt(2.0))) < 1e-5);
  }
  SUBCASE("dilation scaling") {
    const double B2 = coulomb_energy(rescale_field(u, 2.0).field);
    CHECK(rel(B2, 8.0 * B) < 1e-3);
  }
  SUBCASE("field energy of the potential equals B") {
    const auto phi = hartree_potential(u);
    const double q = integrate(u * u);
    CHECK(rel(field_energy(phi, q), B) < 1e-5);
  }
}

TEST_CASE("far_field_report") {
  SUBCASE("zero field") {
    auto g = make_grid(64, 10.0, 2.0);
    RadialField z(g);
    auto rep = far_field_report(z, hartree_potential(z));
    CHECK(rep.limit == 0.0);
    CHECK(rep.deviation == 0.0);
  }
  SUBCASE("gaussian") {
    auto g = make_grid(4096, 40.0, 2.0);
    const auto u = gaussian(g);
    auto rep = far_field_report(u, hartree_potential(u));
    CHECK(rel(rep.limit, std::pow(M_PI, 1.5)) < 1e-6);
    CHECK(rel(rep.mass, std::pow(M_PI, 1.5)) < 1e-6);
    CHECK(rep.deviation < 1e-6 * rep.mass);
    CHECK(rep.lower_bound_constant > 0.0);
  }
}
