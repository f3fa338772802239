#pragma once

#include <span>
#include <vector>

namespace sps::linalg {

/// Symmetric tridiagonal matrix; off[i] couples rows i and i+1.
struct SymTridiag {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }
  std::vector<double> apply(std::span<const double> x) const;
};

std::vector<double> solve(const SymTridiag &t, std::span<const double> rhs);

struct Eigenpair {
  double value = 0.0;
  std::vector<double> vector;
};

/// Eigenpair number `index` (0-based, ascending) of a symmetric tridiagonal.
Eigenpair eigenpair_by_index(const SymTridiag &t, int index);

/// Solver for (T + 2 D G D) x = b with T symmetric tridiagonal, D diagonal and
/// G_ij = g_{max(i,j)} for strictly decreasing positive g. G has a tridiagonal
/// inverse, so with y = G D x the system becomes banded in (x, y) and is
/// factored in O(n).
class CoupledSolver {
public:
  CoupledSolver(const SymTridiag &t, std::span<const double> d,
                std::span<const double> g);

  std::vector<double> solve(std::span<const double> b) const;

  /// (T + 2 D G D) x, applied with cumulative sums.
  static std::vector<double> apply(const SymTridiag &t,
                                   std::span<const double> d,
                                   std::span<const double> g,
                                   std::span<const double> x);

private:
  std::size_t n_ = 0;
  std::vector<double> band_;
  std::vector<int> pivots_;
};

} // namespace sps::linalg
