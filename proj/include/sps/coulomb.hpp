#pragma once

#include "sps/grid.hpp"

#include <vector>

namespace sps {

/// Radial Green's kernel of -Delta on R^3 restricted to the grid:
/// G_ij = g_{max(i,j)} with g_i = 1/r_i for i >= 1 and g_0 = 2/r_1.
///
/// The potential of a nodal density rho is
///   phi_i = sum_j w_j rho_j G_ij + c_i rho_i,
/// a quadrature of phi(r) = (1/r) int_0^r s^2 rho ds + int_r^{r_max} s rho ds.
/// The diagonal term c_i (see kink_correction) cancels the leading error of
/// the trapezoid rule at the kink of the kernel at s = r_i. B is the
/// symmetric form 4 pi sum_i w_i rho_i phi_i.
std::vector<double> green_kernel(const RadialGrid &grid);

/// c_i = -spacing_i^2 / 12.
std::vector<double> kink_correction(const RadialGrid &grid);

/// phi solving -Delta phi = rho for an arbitrary nodal density.
RadialField potential_of_density(const RadialField &rho);

/// phi_u solving -Delta phi = u^2 (kernel 1/(4 pi |x|)).
RadialField hartree_potential(const RadialField &u);

/// B(u) = int phi_u u^2.
double coulomb_energy(const RadialField &u);

/// int |grad phi|^2 over R^3 from cell differences of phi, plus the exact
/// exterior contribution of the point-charge tail beyond r_max.
double field_energy(const RadialField &phi, double charge);

struct FarFieldReport {
  /// 4 pi r phi(r) at r_max.
  double limit = 0.0;
  /// max over the outer quarter of the grid of |4 pi r phi - ||u||_2^2|.
  double deviation = 0.0;
  /// ||u||_2^2.
  double mass = 0.0;
  /// min over the grid of phi(r) (1 + r).
  double lower_bound_constant = 0.0;
};

FarFieldReport far_field_report(const RadialField &u, const RadialField &phi);

} // namespace sps
