#pragma once

#include "sps/energy.hpp"
#include "sps/errors.hpp"
#include "sps/grid.hpp"

#include <span>
#include <string>
#include <vector>

namespace sps {

struct GridSpec {
  std::size_t n = 8192;
  double r_max = 300.0;
  double gamma = 2.0;

  GridPtr build() const { return make_grid(n, r_max, gamma); }
};

struct NewtonOptions {
  int max_iter = 50;
  double backtrack = 0.5;
  double min_step = 1e-12;
};

/// Residual multiplier prod_j (1/||u - u_j||^power + shift).
struct DeflationOptions {
  double shift = 1.0;
  double power = 2.0;
};

/// exp(-r^2/width^2) times prod_{j=1..k} (r - j width spacing).
struct SeedOptions {
  int node_count = 0;
  double amplitude = 1.0;
  double width = 2.0;
  double spacing = 1.0;
};

struct SolverConfig {
  double p = 3.0;
  double mu_target = 1.0;
  GridSpec grid;
  double grad_tol = 1e-8;
  int max_outer_iter = 5000;
  double scf_damping = 0.5;
  /// relative change of (phi, |u|^{p-1}) at which SCF hands over to Newton
  double scf_tol = 1e-1;
  NewtonOptions newton;
  DeflationOptions deflation;
  SeedOptions seed;

  void validate() const;
};

struct Residuals {
  double gradient = 0.0;
  double nehari_normalized = 0.0;
  double pohozaev_normalized = 0.0;
  /// max |u| over the outer 5% of the nodes relative to max |u|
  double tail_magnitude = 0.0;
};

/// Acceptance thresholds shared by every solver.
inline constexpr double nehari_tol = 1e-5;
inline constexpr double pohozaev_tol = 1e-4;
inline constexpr double tail_tol = 1e-10;
inline constexpr double min_M = 1e-6;
/// relative floor below which samples do not count for sign or orientation
inline constexpr double sign_floor = 1e-10;

struct SolutionRecord {
  double p = 0.0;
  double mu = 0.0;
  RadialField u;
  RadialField phi;
  EnergyBreakdown breakdown;
  int node_count = 0;
  /// J of the member of the dilation family with int |u|^{p+1} = 1
  double b_level = 0.0;
  Residuals residuals;
  std::string method;
  int iterations = 0;
  /// int |u|^{p+1} = 1 holds for this record
  bool on_manifold = false;
  /// gradient tolerance the record was produced with
  double grad_tol = 1e-8;
  /// deflation did not prevent reconvergence onto a known record
  bool duplicate = false;
  /// converged with a node count other than the requested one
  bool wrong_branch = false;
};

/// Recompute phi, breakdown, node count, residuals and level from u.
/// Applies the canonical orientation.
SolutionRecord make_record(RadialField u, double p, double mu,
                           std::string method, int iterations,
                           bool on_manifold, double grad_tol);

/// Sign changes of u above sign_floor * max|u|.
int count_nodes(const RadialField &u);

/// True if every residual is within `factor` times the acceptance thresholds
/// and M > min_M.
bool is_accepted(const SolutionRecord &rec, double factor = 1.0);

class NonConvergence : public Error {
public:
  NonConvergence(const std::string &what, SolutionRecord best)
      : Error(what), best_(std::move(best)) {}
  const SolutionRecord &best() const { return best_; }

private:
  SolutionRecord best_;
};

class WrongBranch : public Error {
public:
  WrongBranch(const std::string &what, SolutionRecord rec)
      : Error(what), record_(std::move(rec)) {}
  const SolutionRecord &record() const { return record_; }

private:
  SolutionRecord record_;
};

/// A solution was produced but a post-condition identity did not hold.
class VerificationError : public Error {
public:
  VerificationError(const std::string &what, SolutionRecord rec)
      : Error(what), record_(std::move(rec)) {}
  const SolutionRecord &record() const { return record_; }

private:
  SolutionRecord record_;
};

/// Seed with k sign changes, normalised onto int |u|^{p+1} = 1.
RadialField make_seed(const GridPtr &grid, const SeedOptions &seed, int k,
                      double p);

/// Minimiser of J = A/2 + B/4 on int |u|^{p+1} = 1 by spectral projected
/// gradient (H^1-type preconditioner, Barzilai-Borwein steps, nonmonotone
/// line search, renormalisation retraction). mu = M(u).
SolutionRecord minimize_on_manifold(const SolverConfig &config);

/// Radial critical point of J on the constraint manifold with exactly k sign
/// changes: SCF on (phi, |u|^{p-1}) with Sturm-selected eigenvectors, then
/// bordered Newton on the coupled system, deflated against `known`.
SolutionRecord bound_state(const SolverConfig &config, int k,
                           std::span<const SolutionRecord> known = {});

/// v = lambda^2 u(lambda x) with lambda = (mu*/mu_target)^{1/(2p-4)},
/// interpolated onto the record's grid and Newton-polished at mu_target.
SolutionRecord lagrange_rescale(const SolutionRecord &rec, double mu_target,
                                const SolverConfig &config = {});

/// Positive solution at config.mu_target; checks the A/B/C split against
/// c = I(u) and that t = 1 maximises the dilation path.
SolutionRecord ground_state(const SolverConfig &config);

struct GroundStateSplit {
  double c = 0.0;
  double A_pred = 0.0, B_pred = 0.0, muC_pred = 0.0;
  double max_rel_error = 0.0;
};

/// A = (5p-7)/(2(p-2)) c, B = (5-p)/(p-2) c, mu C = 3(p+1)/(2(p-2)) c.
GroundStateSplit ground_state_split(const EnergyBreakdown &e);

struct P2Eigen {
  double mu = 0.0;
  SolutionRecord record;
  /// mu - 2
  double margin = 0.0;
  double mu_over_b = 0.0;
  /// |I_mu(u)| / M(u)
  double zero_energy = 0.0;
};

P2Eigen p2_eigen(const SolverConfig &config, int k);

/// lambda^2 u(lambda x) for a p = 2 record, on the grid scaled by 1/lambda,
/// residuals re-verified (VerificationError above 10x tolerance).
SolutionRecord p2_family_member(const SolutionRecord &rec, double lambda);

struct ProbeReport {
  double p = 0.0;
  double mu = 0.0;
  /// "collapse", "blowup", "stationary" or "exhausted"
  std::string outcome;
  int iterations = 0;
  double M_initial = 0.0, M_final = 0.0;
  double C_initial = 0.0, C_final = 0.0;
  double I_final = 0.0;
  double max_initial = 0.0, max_final = 0.0;
  bool accepted_record = false;

  bool degenerate() const {
    return outcome == "collapse" || outcome == "blowup";
  }
};

/// Preconditioned gradient flow on I_mu from a bump; only for p >= 5 or
/// p = 2 with mu < 2.
ProbeReport nonexistence_probe(double p, double mu, const SolverConfig &config);

} // namespace sps
