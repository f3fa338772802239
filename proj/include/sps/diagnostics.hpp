#pragma once

#include "sps/solvers.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sps {

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  /// which identity or inequality the check tests
  std::string identity;
};

struct DiagnosticsReport {
  std::vector<Check> checks;

  bool overall() const;
  const Check *find(const std::string &name) const;
  void append(const DiagnosticsReport &other);
};

struct DecayWindow {
  double r_lo = 0.0;
  double r_hi = 0.0;
};

/// [max(5, 0.1 r_max), 0.7 r_max]
DecayWindow default_decay_window(const RadialGrid &grid);

struct DecayFit {
  double C1 = 0.0;
  double C2 = 0.0;
  double r_squared = 0.0;
  std::size_t nodes_used = 0;
  /// C2 <= 0 or r_squared < 0.99
  bool flagged = false;
};

/// Least squares for log(|u| r^{3/4}) = log C1 - C2 sqrt(r) over the window,
/// using nodes with |u| > 1e-12. Throws WindowError for fewer than 20 usable
/// nodes or a window outside [0, 0.8 r_max].
DecayFit decay_fit(const RadialField &u, DecayWindow window);

/// Record overload; requires p >= 2 (no pass threshold is implied at p = 2).
DecayFit decay_fit(const SolutionRecord &rec,
                   std::optional<DecayWindow> window = std::nullopt);

/// |u| <= mu phi through the tail, phi (1 + r) bounded below, and
/// int |u|^3 <= M / 2.
DiagnosticsReport comparison_checks(const SolutionRecord &rec);

/// Nehari, Pohozaev, dilation-path stationarity, stationarity of the discrete
/// gradient, M bounded away from zero, plus the multiplier law (manifold
/// records), the energy split (p in (2,5) at prescribed mu) or the zero-energy
/// identity (p = 2).
DiagnosticsReport identity_report(const SolutionRecord &rec);

} // namespace sps
