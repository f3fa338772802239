#include "sps/coulomb.hpp"

#include <algorithm>
#include <cmath>

namespace sps {

std::vector<double> green_kernel(const RadialGrid &grid) {
  std::vector<double> g(grid.size());
  for (std::size_t i = 1; i < g.size(); ++i)
    g[i] = 1.0 / grid.r(i);
  g[0] = 2.0 * g[1];
  return g;
}

std::vector<double> kink_correction(const RadialGrid &grid) {
  std::vector<double> c(grid.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = -grid.spacing(i) * grid.spacing(i) / 12.0;
  return c;
}

RadialField potential_of_density(const RadialField &rho) {
  const RadialGrid &grid = rho.grid();
  const std::size_t n = grid.size();
  const auto g = green_kernel(grid);
  const auto c = kink_correction(grid);

  // phi_i = g_i * sum_{j<=i} w_j rho_j + sum_{j>i} w_j rho_j g_j + c_i rho_i
  std::vector<double> phi(n);
  std::vector<double> outer(n, 0.0);
  for (std::size_t k = n - 1; k-- > 0;)
    outer[k] = outer[k + 1] + grid.w(k + 1) * rho[k + 1] * g[k + 1];
  double inner = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inner += grid.w(i) * rho[i];
    phi[i] = g[i] * inner + outer[i] + c[i] * rho[i];
  }
  return RadialField(rho.grid_ptr(), std::move(phi));
}

RadialField hartree_potential(const RadialField &u) {
  return potential_of_density(u * u);
}

double coulomb_energy(const RadialField &u) {
  const RadialField rho = u * u;
  return integrate(potential_of_density(rho) * rho);
}

double field_energy(const RadialField &phi, double charge) {
  const RadialGrid &g = phi.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < g.intervals(); ++i) {
    const double d = (phi[i + 1] - phi[i]) / g.h(i);
    s += d * d * g.cell_volume(i);
  }
  // phi = q/r outside the support, q = charge / (4 pi)
  const double q = charge / four_pi;
  return four_pi * s + four_pi * q * q / g.r_max();
}

FarFieldReport far_field_report(const RadialField &u, const RadialField &phi) {
  const RadialGrid &g = u.grid();
  FarFieldReport rep;
  rep.mass = integrate(u * u);
  const std::size_t n = g.intervals();
  rep.limit = four_pi * g.r(n) * phi[n];
  for (std::size_t i = (3 * n) / 4; i <= n; ++i)
    rep.deviation =
        std::max(rep.deviation, std::abs(four_pi * g.r(i) * phi[i] - rep.mass));
  double c = phi[0];
  for (std::size_t i = 0; i <= n; ++i)
    c = std::min(c, phi[i] * (1.0 + g.r(i)));
  rep.lower_bound_constant = c;
  return rep;
}

} // namespace sps
