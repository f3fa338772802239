#include "sps/energy.hpp"

#include "sps/coulomb.hpp"
#include "sps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

namespace sps {

namespace {

Residual normalize(double value, std::initializer_list<double> terms) {
  double scale = 0.0;
  for (double t : terms)
    scale = std::max(scale, std::abs(t));
  return {value, scale > 0.0 ? value / scale : 0.0};
}

} // namespace

EnergyBreakdown EnergyBreakdown::from_parts(double A, double B, double C,
                                            double p, double mu) {
  EnergyBreakdown e;
  e.A = A;
  e.B = B;
  e.C = C;
  e.p = p;
  e.mu = mu;
  e.J = 0.5 * A + 0.25 * B;
  e.I = e.J - mu * C / (p + 1.0);
  e.M = A + B;
  e.normE = std::sqrt(A + std::sqrt(B));
  return e;
}

void check_exponent_and_coupling(double p, double mu) {
  if (!(p > 1.0 && p <= 5.0))
    throw ConfigError("exponent p must lie in (1, 5]");
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw ConfigError("coupling mu must be positive");
}

double dirichlet_energy(const RadialField &u) {
  const RadialGrid &g = u.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < g.intervals(); ++i) {
    const double d = (u[i + 1] - u[i]) / g.h(i);
    s += d * d * g.cell_volume(i);
  }
  return four_pi * s;
}

double lp_integral(const RadialField &u, double q) {
  const RadialGrid &g = u.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    s += g.w(i) * std::pow(std::abs(u[i]), q);
  return four_pi * s;
}

EnergyBreakdown compute_breakdown(const RadialField &u, double p, double mu) {
  check_exponent_and_coupling(p, mu);
  return EnergyBreakdown::from_parts(dirichlet_energy(u), coulomb_energy(u),
                                     lp_integral(u, p + 1.0), p, mu);
}

double discrete_energy(const RadialField &u, double p, double mu) {
  return compute_breakdown(u, p, mu).I;
}

RadialField discrete_gradient(const RadialField &u, double p, double mu) {
  check_exponent_and_coupling(p, mu);
  const RadialGrid &g = u.grid();
  const std::size_t n = g.intervals();
  const RadialField phi = hartree_potential(u);
  std::vector<double> grad(g.size(), 0.0);

  // 1/2 dA: stiffness of the piecewise-linear interpolant
  for (std::size_t i = 0; i < n; ++i) {
    const double k = g.cell_volume(i) / (g.h(i) * g.h(i));
    const double flux = k * (u[i + 1] - u[i]);
    grad[i] -= flux;
    grad[i + 1] += flux;
  }
  // 1/4 dB = w phi u (direct and response halves coincide, G symmetric)
  for (std::size_t i = 0; i <= n; ++i) {
    const double a = std::abs(u[i]);
    grad[i] += g.w(i) * (phi[i] * u[i] - mu * std::pow(a, p - 1.0) * u[i]);
  }
  for (double &x : grad)
    x *= four_pi;
  return RadialField(u.grid_ptr(), std::move(grad));
}

double weighted_gradient_norm(const RadialField &u, double p, double mu) {
  const RadialField grad = discrete_gradient(u, p, mu);
  const RadialGrid &g = u.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < g.intervals(); ++i)
    s += grad[i] * grad[i] / (four_pi * g.w(i));
  return std::sqrt(s);
}

Residual pohozaev_residual(const EnergyBreakdown &e) {
  const double t1 = 0.5 * e.A;
  const double t2 = 1.25 * e.B;
  const double t3 = 3.0 * e.mu * e.C / (e.p + 1.0);
  return normalize(t1 + t2 - t3, {t1, t2, t3});
}

Residual pohozaev_residual(const RadialField &u, double p, double mu) {
  return pohozaev_residual(compute_breakdown(u, p, mu));
}

Residual nehari_residual(const EnergyBreakdown &e) {
  const double t3 = e.mu * e.C;
  return normalize(e.A + e.B - t3, {e.A, e.B, t3});
}

Residual nehari_residual(const RadialField &u, double p, double mu) {
  return nehari_residual(compute_breakdown(u, p, mu));
}

Residual virial_derivative(const EnergyBreakdown &e) {
  const double t1 = 1.5 * e.A;
  const double t2 = 0.75 * e.B;
  const double t3 = (2.0 * e.p - 1.0) * e.mu * e.C / (e.p + 1.0);
  return normalize(t1 + t2 - t3, {t1, t2, t3});
}

VirialPath virial_path(const EnergyBreakdown &e, std::span<const double> t) {
  if (t.empty())
    throw DomainError("virial path needs at least one t value");
  VirialPath path;
  path.points.reserve(t.size());
  for (double ti : t) {
    if (!(ti > 0.0))
      throw DomainError("virial path t values must be positive");
    const double f = ti * ti * ti * e.J -
                     e.mu * std::pow(ti, 2.0 * e.p - 1.0) * e.C / (e.p + 1.0);
    path.points.push_back({ti, f});
  }
  if (e.p > 2.0) {
    const auto best = std::max_element(
        path.points.begin(), path.points.end(),
        [](const VirialPoint &a, const VirialPoint &b) { return a.f < b.f; });
    path.argmax = best->t;
  }
  return path;
}

VirialPath virial_path(const RadialField &u, double p, double mu,
                       std::span<const double> t) {
  return virial_path(compute_breakdown(u, p, mu), t);
}

double sobolev_ratio(const EnergyBreakdown &e) {
  if (!(e.M > 0.0))
    throw DomainError("Sobolev ratio undefined for M = 0");
  return e.C / std::pow(e.M, (2.0 * e.p - 1.0) / 3.0);
}

double sobolev_ratio(const RadialField &u, double p) {
  return sobolev_ratio(compute_breakdown(u, p, 1.0));
}

} // namespace sps
