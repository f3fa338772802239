#pragma once

#include "sps/grid.hpp"

#include <optional>
#include <span>
#include <vector>

namespace sps {

/// Scalar pieces of the functional for one field.
///   A = int |grad u|^2, B = int phi_u u^2, C = int |u|^{p+1}
///   I = A/2 + B/4 - mu C/(p+1),  J = A/2 + B/4,  M = A + B,
///   normE = (A + sqrt(B))^{1/2}
struct EnergyBreakdown {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double p = 0.0;
  double mu = 0.0;
  double I = 0.0;
  double J = 0.0;
  double M = 0.0;
  double normE = 0.0;

  static EnergyBreakdown from_parts(double A, double B, double C, double p,
                                    double mu);
};

struct Residual {
  double absolute = 0.0;
  double normalized = 0.0;
};

/// Throws ConfigError unless p in (1, 5] and mu > 0.
void check_exponent_and_coupling(double p, double mu);

/// int |grad u|^2 of the piecewise-linear interpolant (exact per cell).
double dirichlet_energy(const RadialField &u);

/// int |u|^q.
double lp_integral(const RadialField &u, double q);

EnergyBreakdown compute_breakdown(const RadialField &u, double p, double mu);

/// Exact gradient of the discrete I_mu with respect to the nodal values.
RadialField discrete_gradient(const RadialField &u, double p, double mu);

/// Discrete I_mu itself (the functional discrete_gradient differentiates).
double discrete_energy(const RadialField &u, double p, double mu);

/// L^2(R^3) norm of the nodal residual g_i / (4 pi w_i) of
/// -Delta u + phi u - mu |u|^{p-1} u, over the free nodes (boundary node
/// excluded).
double weighted_gradient_norm(const RadialField &u, double p, double mu);

/// A/2 + 5B/4 - 3 mu C/(p+1).
Residual pohozaev_residual(const EnergyBreakdown &e);
Residual pohozaev_residual(const RadialField &u, double p, double mu);

/// A + B - mu C.
Residual nehari_residual(const EnergyBreakdown &e);
Residual nehari_residual(const RadialField &u, double p, double mu);

/// f'(1) = 3A/2 + 3B/4 - (2p-1) mu C/(p+1).
Residual virial_derivative(const EnergyBreakdown &e);

struct VirialPoint {
  double t;
  double f;
};

struct VirialPath {
  std::vector<VirialPoint> points;
  /// Maximiser over the sampled t, reported for p > 2.
  std::optional<double> argmax;
};

/// f(t) = I_mu(t^2 u(t.)) = t^3 J - mu t^{2p-1} C/(p+1), closed form.
VirialPath virial_path(const EnergyBreakdown &e, std::span<const double> t);
VirialPath virial_path(const RadialField &u, double p, double mu,
                       std::span<const double> t);

/// C / M^{(2p-1)/3}; invariant under u -> t^2 u(t.).
double sobolev_ratio(const EnergyBreakdown &e);
double sobolev_ratio(const RadialField &u, double p);

} // namespace sps
