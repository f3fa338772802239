#include "sps/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace sps {

bool DiagnosticsReport::overall() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const Check &c) { return c.pass; });
}

const Check *DiagnosticsReport::find(const std::string &name) const {
  for (const auto &c : checks)
    if (c.name == name)
      return &c;
  return nullptr;
}

void DiagnosticsReport::append(const DiagnosticsReport &other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

DecayWindow default_decay_window(const RadialGrid &grid) {
  return {std::max(5.0, 0.1 * grid.r_max()), 0.7 * grid.r_max()};
}

DecayFit decay_fit(const RadialField &u, DecayWindow window) {
  const RadialGrid &g = u.grid();
  if (!(window.r_lo >= 0.0 && window.r_hi > window.r_lo &&
        window.r_hi <= 0.8 * g.r_max()))
    throw WindowError("decay window must satisfy 0 <= r_lo < r_hi <= 0.8 r_max");

  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    if (r < window.r_lo || r > window.r_hi || !(std::abs(u[i]) > 1e-12))
      continue;
    const double x = std::sqrt(r);
    const double y = std::log(std::abs(u[i]) * std::pow(r, 0.75));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++n;
  }
  if (n < 20)
    throw WindowError("decay window has " + std::to_string(n) +
                      " usable nodes, need at least 20");

  const double dn = static_cast<double>(n);
  const double cxx = sxx - sx * sx / dn;
  const double cxy = sxy - sx * sy / dn;
  const double cyy = syy - sy * sy / dn;
  const double slope = cxy / cxx;
  const double intercept = (sy - slope * sx) / dn;

  DecayFit fit;
  fit.nodes_used = n;
  fit.C2 = -slope;
  fit.C1 = std::exp(intercept);
  const double ss_res = std::max(cyy - slope * cxy, 0.0);
  fit.r_squared = cyy > 0.0 ? 1.0 - ss_res / cyy : 1.0;
  fit.flagged = !(fit.C2 > 0.0) || fit.r_squared < 0.99;
  return fit;
}

DecayFit decay_fit(const SolutionRecord &rec,
                   std::optional<DecayWindow> window) {
  if (rec.p < 2.0)
    throw DomainError("decay fit is defined for p >= 2");
  return decay_fit(rec.u, window.value_or(default_decay_window(rec.u.grid())));
}

DiagnosticsReport comparison_checks(const SolutionRecord &rec) {
  const RadialGrid &g = rec.u.grid();
  const std::size_t n = g.intervals();
  DiagnosticsReport rep;

  // smallest grid radius beyond which |u| <= mu phi holds through the tail
  std::size_t first_ok = 0;
  for (std::size_t i = n + 1; i-- > 0;) {
    if (std::abs(rec.u[i]) > rec.mu * rec.phi[i]) {
      first_ok = i + 1;
      break;
    }
  }
  const double R = first_ok <= n ? g.r(first_ok) : g.r_max();
  rep.checks.push_back({"comparison radius", R, 0.5 * g.r_max(),
                        R < 0.5 * g.r_max(), "|u| <= mu phi_u for r > R"});

  double c = rec.phi[0];
  for (std::size_t i = 0; i <= n; ++i)
    c = std::min(c, rec.phi[i] * (1.0 + g.r(i)));
  const bool trivial = rec.u.max_abs() == 0.0;
  rep.checks.push_back({"potential lower bound", c, 0.0, trivial || c > 0.0,
                        "phi_u(r) >= c / (1 + r), c > 0"});

  const double l3 = lp_integral(rec.u, 3.0);
  const double slack = 0.5 * rec.breakdown.M - l3;
  rep.checks.push_back({"Coulomb inequality", slack, 0.0, slack >= 0.0,
                        "int |u|^3 <= (A + B) / 2"});
  return rep;
}

DiagnosticsReport identity_report(const SolutionRecord &rec) {
  const auto &e = rec.breakdown;
  const double p = rec.p;
  DiagnosticsReport rep;

  const double neh = std::abs(nehari_residual(e).normalized);
  rep.checks.push_back(
      {"Nehari", neh, nehari_tol, neh < nehari_tol, "A + B = mu C"});
  const double poh = std::abs(pohozaev_residual(e).normalized);
  rep.checks.push_back({"Pohozaev", poh, pohozaev_tol, poh < pohozaev_tol,
                        "A/2 + 5B/4 = 3 mu C/(p+1)"});
  const double vir = std::abs(virial_derivative(e).normalized);
  rep.checks.push_back({"dilation stationarity", vir, 1e-4, vir < 1e-4,
                        "f'(1) = 0 on t -> I(t^2 u(t.))"});
  const double gtol = 10.0 * rec.grad_tol;
  rep.checks.push_back({"gradient", rec.residuals.gradient, gtol,
                        rec.residuals.gradient < gtol,
                        "discrete Euler-Lagrange residual"});
  rep.checks.push_back(
      {"M lower bound", e.M, min_M, e.M > min_M, "M[u] > eta > 0"});

  if (rec.on_manifold) {
    const double want = 3.0 * (p + 1.0) / (2.0 * p - 1.0);
    const double got = rec.b_level > 0.0 ? rec.mu / rec.b_level : 0.0;
    rep.checks.push_back({"multiplier law", got, 1e-3,
                          std::abs(got / want - 1.0) < 1e-3,
                          "mu = 3(p+1)/(2p-1) b"});
  } else if (p > 2.0 && p < 5.0) {
    const double err = ground_state_split(e).max_rel_error;
    rep.checks.push_back({"energy split", err, 1e-3, err < 1e-3,
                          "(A, B, mu C) in terms of c = I_mu(u)"});
  }
  if (p == 2.0) {
    const double z = e.M > 0.0 ? std::abs(e.I) / e.M : 0.0;
    rep.checks.push_back(
        {"zero energy", z, 1e-5, z < 1e-5, "I_mu(u) = 0 at p = 2"});
  }
  return rep;
}

} // namespace sps
