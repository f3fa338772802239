#include <doctest.h>

#include "sps/errors.hpp"
#include "sps/solvers.hpp"

#include <cmath>

using namespace sps;

namespace {

double rel(double got, double want) { return std::abs(got / want - 1.0); }

SolverConfig config(double p) {
  SolverConfig c;
  c.p = p;
  return c;
}

double distance2(const RadialField &a, const RadialField &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a.grid().w(i) * (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

} // namespace

TEST_CASE("config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.p = 5.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.grad_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.scf_damping = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.seed.node_count = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.grid.n = 4;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("seeds") {
  auto g = make_grid(2048, 40.0, 2.0);
  for (int k = 0; k <= 3; ++k) {
    const auto u = make_seed(g, SeedOptions{}, k, 3.0);
    CHECK(count_nodes(u) == k);
    CHECK(lp_integral(u, 4.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SeedOptions zero;
  zero.amplitude = 0.0;
  CHECK_THROWS_AS(make_seed(g, zero, 0, 3.0), ConfigError);
  CHECK_THROWS_AS(make_seed(g, SeedOptions{}, -1, 3.0), ConfigError);
}

TEST_CASE("minimize_on_manifold") {
  SUBCASE("p = 3 multiplier law") {
    const auto rec = minimize_on_manifold(config(3.0));
    CHECK(rel(rec.mu / rec.b_level, 12.0 / 5.0) < 1e-3);
    CHECK(std::abs(rec.breakdown.C - 1.0) < 1e-13);
    CHECK(rec.node_count == 0);
    CHECK(rec.on_manifold);
    CHECK(is_accepted(rec));
    CHECK(rec.u[0] > 0.0);
  }
  SUBCASE("p = 2 multiplier law") {
    const auto rec = minimize_on_manifold(config(2.0));
    CHECK(rel(rec.mu / rec.b_level, 3.0) < 1e-3);
  }
  SUBCASE("zero seed") {
    auto c = config(3.0);
    c.seed.amplitude = 0.0;
    CHECK_THROWS_AS(minimize_on_manifold(c), ConfigError);
  }
  SUBCASE("deterministic") {
    const auto a = minimize_on_manifold(config(3.0));
    const auto b = minimize_on_manifold(config(3.0));
    REQUIRE(a.u.size() == b.u.size());
    bool same = true;
    for (std::size_t i = 0; i < a.u.size(); ++i)
      same = same && a.u[i] == b.u[i];
    CHECK(same);
    CHECK(a.mu == b.mu);
  }
}

TEST_CASE("bound_state") {
  const auto c = config(3.0);
  const auto r0 = bound_state(c, 0);
  SUBCASE("ground level is positive") {
    const double floor = sign_floor * r0.u.max_abs();
    bool positive = true;
    for (double v : r0.u.values())
      positive = positive && (v > 0.0 || std::abs(v) <= floor);
    CHECK(positive);
    CHECK(is_accepted(r0));
    CHECK(rel(r0.mu / r0.b_level, 2.4) < 1e-3);
  }
  SUBCASE("one node lies above the ground level") {
    const auto r1 = bound_state(c, 1);
    CHECK(r1.node_count == 1);
    CHECK(r1.b_level > r0.b_level);
    CHECK(is_accepted(r1));
    CHECK(r1.u[0] > 0.0);
  }
  SUBCASE("deflation never silently repeats a record") {
    const SolutionRecord known[] = {r0};
    try {
      const auto again = bound_state(c, 0, known);
      CHECK((again.duplicate || distance2(again.u, r0.u) > 1e-12));
    } catch (const NonConvergence &e) {
      CHECK(e.best().residuals.gradient >= c.grad_tol);
    } catch (const WrongBranch &e) {
      CHECK(e.record().wrong_branch);
    }
  }
  SUBCASE("negative node count") {
    CHECK_THROWS_AS(bound_state(c, -1), ConfigError);
  }
}

TEST_CASE("lagrange_rescale") {
  const auto c = config(3.0);
  const auto rec = minimize_on_manifold(c);
  SUBCASE("identity at mu*") {
    const auto same = lagrange_rescale(rec, rec.mu, c);
    CHECK(same.mu == rec.mu);
    for (std::size_t i = 0; i < rec.u.size(); ++i)
      REQUIRE(same.u[i] == rec.u[i]);
  }
  SUBCASE("to mu = 1") {
    const auto out = lagrange_rescale(rec, 1.0, c);
    CHECK(out.mu == 1.0);
    CHECK(out.node_count == rec.node_count);
    CHECK(std::abs(out.residuals.nehari_normalized) < 1e-4);
    CHECK(is_accepted(out));
    // lambda = sqrt(mu*) at p = 3, so u(0) scales by mu*
    CHECK(rel(out.u[0], rec.mu * rec.u[0]) < 1e-3);
  }
  SUBCASE("p = 2 is invariant") {
    const auto r2 = minimize_on_manifold(config(2.0));
    CHECK_THROWS_AS(lagrange_rescale(r2, 1.0), InvarianceError);
  }
}

TEST_CASE("ground_state") {
  SUBCASE("p = 3 split") {
    auto c = config(3.0);
    const auto rec = ground_state(c);
    const double cc = rec.breakdown.I;
    CHECK(rel(rec.breakdown.A, 4.0 * cc) < 1e-3);
    CHECK(rel(rec.breakdown.B, 2.0 * cc) < 1e-3);
    CHECK(rel(rec.mu * rec.breakdown.C, 6.0 * cc) < 1e-3);
  }
  SUBCASE("p = 4 split") {
    const auto rec = ground_state(config(4.0));
    const double cc = rec.breakdown.I;
    CHECK(rel(rec.breakdown.A, 13.0 * cc / 4.0) < 1e-3);
    CHECK(rel(rec.breakdown.B, cc / 2.0) < 1e-3);
    CHECK(rel(rec.mu * rec.breakdown.C, 15.0 * cc / 4.0) < 1e-3);
  }
  SUBCASE("outside (2, 5)") {
    CHECK_THROWS_AS(ground_state(config(2.0)), DomainError);
    CHECK_THROWS_AS(ground_state(config(5.0)), DomainError);
  }
}

TEST_CASE("p2 mode") {
  const auto eig = p2_eigen(config(2.0), 0);
  CHECK(eig.mu >= 2.0);
  CHECK(eig.margin == eig.mu - 2.0);
  CHECK(rel(eig.mu_over_b, 3.0) < 1e-3);
  CHECK(eig.zero_energy < 1e-5);

  const auto member = p2_family_member(eig.record, 2.0);
  CHECK(member.mu == eig.record.mu);
  CHECK(member.residuals.gradient < 10.0 * eig.record.grad_tol);
  CHECK(member.u.grid().r_max() == doctest::Approx(eig.record.u.grid().r_max() / 2));

  CHECK_THROWS_AS(p2_eigen(config(3.0), 0), DomainError);
  CHECK_THROWS_AS(p2_family_member(minimize_on_manifold(config(3.0)), 2.0),
                  DomainError);
}

TEST_CASE("nonexistence_probe") {
  const SolverConfig c;
  SUBCASE("supercritical") {
    const auto rep = nonexistence_probe(5.0, 1.0, c);
    CHECK_FALSE(rep.accepted_record);
    CHECK(rep.degenerate());
  }
  SUBCASE("p = 2 below the threshold") {
    for (double mu : {1.0, 1.5}) {
      const auto rep = nonexistence_probe(2.0, mu, c);
      CHECK_FALSE(rep.accepted_record);
      CHECK(rep.degenerate());
    }
  }
  SUBCASE("existence regime is refused") {
    CHECK_THROWS_AS(nonexistence_probe(3.0, 1.0, c), ConfigError);
    CHECK_THROWS_AS(nonexistence_probe(2.0, 2.5, c), ConfigError);
  }
}
