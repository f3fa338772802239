#include "sps/solvers.hpp"

#include "sps/coulomb.hpp"
#include "sps/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <functional>
#include <optional>

namespace sps {

void SolverConfig::validate() const {
  if (!(p > 1.0 && p <= 5.0))
    throw ConfigError("exponent p must lie in (1, 5]");
  if (!(mu_target > 0.0))
    throw ConfigError("mu_target must be positive");
  if (!(grad_tol > 0.0) || !(scf_tol > 0.0))
    throw ConfigError("tolerances must be positive");
  if (max_outer_iter <= 0 || newton.max_iter <= 0)
    throw ConfigError("iteration limits must be positive");
  if (!(scf_damping > 0.0 && scf_damping <= 1.0))
    throw ConfigError("scf_damping must lie in (0, 1]");
  if (!(newton.backtrack > 0.0 && newton.backtrack < 1.0) ||
      !(newton.min_step > 0.0))
    throw ConfigError("invalid Newton line-search settings");
  if (!(deflation.shift >= 0.0) || !(deflation.power > 0.0))
    throw ConfigError("invalid deflation settings");
  if (seed.node_count < 0)
    throw ConfigError("node count must be >= 0");
  if (!(seed.width > 0.0) || !(seed.spacing > 0.0))
    throw ConfigError("seed width and spacing must be positive");
  make_grid(grid.n, grid.r_max, grid.gamma);
}

int count_nodes(const RadialField &u) {
  const double floor = sign_floor * u.max_abs();
  int nodes = 0;
  int last = 0;
  for (double v : u.values()) {
    if (std::abs(v) <= floor)
      continue;
    const int s = v > 0.0 ? 1 : -1;
    if (last != 0 && s != last)
      ++nodes;
    last = s;
  }
  return nodes;
}

namespace {

void orient(RadialField &u) {
  const double floor = sign_floor * u.max_abs();
  for (double v : u.values()) {
    if (std::abs(v) > floor) {
      if (v < 0.0)
        for (double &x : u.mutable_values())
          x = -x;
      return;
    }
  }
}

double tail_magnitude(const RadialField &u) {
  const double umax = u.max_abs();
  if (umax == 0.0)
    return 0.0;
  const std::size_t n = u.grid().intervals();
  const auto start = static_cast<std::size_t>(std::ceil(0.95 * n));
  double t = 0.0;
  for (std::size_t i = start; i <= n; ++i)
    t = std::max(t, std::abs(u[i]));
  return t / umax;
}

} // namespace

SolutionRecord make_record(RadialField u, double p, double mu,
                           std::string method, int iterations,
                           bool on_manifold, double grad_tol) {
  orient(u);
  SolutionRecord rec;
  rec.p = p;
  rec.mu = mu;
  rec.phi = hartree_potential(u);
  rec.breakdown = compute_breakdown(u, p, mu);
  rec.node_count = count_nodes(u);
  const auto &e = rec.breakdown;
  rec.b_level = e.C > 0.0 ? e.J * std::pow(e.C, -3.0 / (2.0 * p - 1.0)) : 0.0;
  rec.residuals.gradient = weighted_gradient_norm(u, p, mu);
  rec.residuals.nehari_normalized = nehari_residual(e).normalized;
  rec.residuals.pohozaev_normalized = pohozaev_residual(e).normalized;
  rec.residuals.tail_magnitude = tail_magnitude(u);
  rec.u = std::move(u);
  rec.method = std::move(method);
  rec.iterations = iterations;
  rec.on_manifold = on_manifold;
  rec.grad_tol = grad_tol;
  return rec;
}

bool is_accepted(const SolutionRecord &rec, double factor) {
  const auto &r = rec.residuals;
  return r.gradient < factor * rec.grad_tol &&
         std::abs(r.nehari_normalized) < factor * nehari_tol &&
         std::abs(r.pohozaev_normalized) < factor * pohozaev_tol &&
         r.tail_magnitude < tail_tol && rec.breakdown.M > min_M;
}

namespace {

/// Discrete operators on the free nodes 0..n-1; u_n = 0 at r_max.
struct Problem {
  GridPtr grid;
  double p = 0.0;
  std::size_t m = 0;
  linalg::SymTridiag K;
  std::vector<double> w;
  std::vector<double> g;
  std::vector<double> kink;

  Problem(GridPtr gr, double exponent) : grid(std::move(gr)), p(exponent) {
    const RadialGrid &G = *grid;
    m = G.intervals();
    K.diag.assign(m, 0.0);
    K.off.assign(m - 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double k = G.cell_volume(i) / (G.h(i) * G.h(i));
      K.diag[i] += k;
      if (i + 1 < m) {
        K.diag[i + 1] += k;
        K.off[i] -= k;
      }
    }
    w.assign(G.weights().begin(), G.weights().begin() + m);
    auto full = green_kernel(G);
    g.assign(full.begin(), full.begin() + m);
    const auto c = kink_correction(G);
    kink.assign(c.begin(), c.begin() + m);
  }

  RadialField field(std::span<const double> x) const {
    std::vector<double> v(x.begin(), x.end());
    v.push_back(0.0);
    return RadialField(grid, std::move(v));
  }

  std::vector<double> state(const RadialField &u) const {
    return {u.values().begin(), u.values().begin() + m};
  }

  std::vector<double> potential(std::span<const double> x) const {
    const RadialField phi = hartree_potential(field(x));
    return {phi.values().begin(), phi.values().begin() + m};
  }

  /// K x + w (phi - mu |x|^{p-1}) x
  std::vector<double> residual(std::span<const double> x,
                               std::span<const double> phi, double mu) const {
    std::vector<double> f = K.apply(x);
    for (std::size_t i = 0; i < m; ++i)
      f[i] += w[i] * (phi[i] - mu * std::pow(std::abs(x[i]), p - 1.0)) * x[i];
    return f;
  }

  /// sqrt(4 pi sum f^2 / w) for f a residual without the 4 pi factor.
  double norm_residual(std::span<const double> f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      s += f[i] * f[i] / w[i];
    return std::sqrt(four_pi * s);
  }

  double norm2(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      s += w[i] * x[i] * x[i];
    return four_pi * s;
  }

  double lp(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      s += w[i] * std::pow(std::abs(x[i]), p + 1.0);
    return four_pi * s;
  }

  /// x scaled onto int |x|^{p+1} = 1
  bool normalize(std::vector<double> &x) const {
    const double c = lp(x);
    if (!(c > 0.0) || !std::isfinite(c))
      return false;
    const double s = std::pow(c, -1.0 / (p + 1.0));
    for (double &v : x)
      v *= s;
    return true;
  }

  /// J = A/2 + B/4 and its gradient without the 4 pi factor.
  double manifold_energy(std::span<const double> x, std::vector<double> &phi,
                         std::vector<double> &grad) const {
    phi = potential(x);
    grad = K.apply(x);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      a += x[i] * grad[i];
      b += w[i] * phi[i] * x[i] * x[i];
      grad[i] += w[i] * phi[i] * x[i];
    }
    return four_pi * (0.5 * a + 0.25 * b);
  }

  std::vector<double> nonlinearity(std::span<const double> x) const {
    std::vector<double> a(m);
    for (std::size_t i = 0; i < m; ++i)
      a[i] = w[i] * std::pow(std::abs(x[i]), p - 1.0) * x[i];
    return a;
  }

  linalg::SymTridiag preconditioner(std::span<const double> phi) const {
    linalg::SymTridiag P = K;
    for (std::size_t i = 0; i < m; ++i)
      P.diag[i] += w[i] * phi[i];
    return P;
  }
};

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

struct NewtonResult {
  std::vector<double> x;
  double mu = 0.0;
  int iterations = 0;
  bool converged = false;
  double gnorm = 0.0;
};

/// Deflation as d/d(step) of log prod_j (||x - x_j||^{-q} + shift), applied to
/// the undeflated Newton step; returns the step multiplier.
double deflation_factor(const Problem &P, std::span<const double> x,
                        std::span<const double> step,
                        const std::vector<std::vector<double>> &known,
                        const DeflationOptions &opt) {
  if (known.empty())
    return 1.0;
  double dlog = 0.0;
  for (const auto &xj : known) {
    for (double sign : {1.0, -1.0}) {
      double nrm = 0.0, deriv = 0.0;
      for (std::size_t i = 0; i < P.m; ++i) {
        const double e = x[i] - sign * xj[i];
        nrm += P.w[i] * e * e;
        deriv += 2.0 * P.w[i] * e * step[i];
      }
      nrm *= four_pi;
      deriv *= four_pi;
      nrm = std::max(nrm, 1e-300);
      const double q = opt.power;
      const double t = std::pow(nrm, -0.5 * q) + opt.shift;
      dlog += -0.5 * q * std::pow(nrm, -0.5 * q - 1.0) * deriv / t;
    }
  }
  const double denom = 1.0 - dlog;
  if (!std::isfinite(denom) || std::abs(denom) < 1e-3)
    return 1e3;
  return std::clamp(1.0 / denom, -1e3, 1e3);
}

/// Newton on K x + w(phi - mu|x|^{p-1})x = 0, with the constraint
/// int |x|^{p+1} = 1 and mu as an extra unknown when `constrained`.
NewtonResult newton_solve(const Problem &P, std::vector<double> x, double mu,
                          bool constrained, const SolverConfig &cfg,
                          const std::vector<std::vector<double>> &known) {
  const double p = P.p;
  const double target = 1.0 / four_pi;
  auto evaluate = [&](std::span<const double> xs, double mus, double &c,
                      std::vector<double> &phi, std::vector<double> &F) {
    phi = P.potential(xs);
    F = P.residual(xs, phi, mus);
    c = 0.0;
    if (constrained) {
      for (std::size_t i = 0; i < P.m; ++i)
        c += P.w[i] * std::pow(std::abs(xs[i]), p + 1.0);
      c -= target;
    }
    const double gn = P.norm_residual(F);
    const double cn = four_pi * c;
    return gn * gn + cn * cn;
  };

  NewtonResult res;
  std::vector<double> phi, F;
  double c = 0.0;
  double merit = evaluate(x, mu, c, phi, F);
  for (int it = 0; it < cfg.newton.max_iter; ++it) {
    res.iterations = it;
    const double gn = P.norm_residual(F);
    if (gn < cfg.grad_tol && std::abs(four_pi * c) < 1e-13) {
      res.converged = true;
      break;
    }
    linalg::SymTridiag T = P.K;
    std::vector<double> d(P.m);
    for (std::size_t i = 0; i < P.m; ++i) {
      const double a = std::abs(x[i]);
      // the kink term of phi contributes 2 c_i w_i x_i^2 to the Hartree response
      T.diag[i] += P.w[i] * (phi[i] - p * mu * std::pow(a, p - 1.0) +
                             2.0 * P.kink[i] * x[i] * x[i]);
      d[i] = P.w[i] * x[i];
    }
    std::vector<double> delta;
    double dmu = 0.0;
    try {
      linalg::CoupledSolver S(T, d, P.g);
      std::vector<double> rhs(F.size());
      for (std::size_t i = 0; i < F.size(); ++i)
        rhs[i] = -F[i];
      delta = S.solve(rhs);
      if (constrained) {
        const auto a = P.nonlinearity(x);
        const auto z2 = S.solve(a);
        const double den = (p + 1.0) * dot(a, z2);
        dmu = (-c - (p + 1.0) * dot(a, delta)) / den;
        for (std::size_t i = 0; i < P.m; ++i)
          delta[i] += dmu * z2[i];
      }
    } catch (const DomainError &) {
      break;
    }
    const double alpha = deflation_factor(P, x, delta, known, cfg.deflation);

    double step = alpha;
    bool moved = false;
    std::vector<double> xt(P.m), phit, Ft;
    double ct = 0.0;
    while (std::abs(step) >= cfg.newton.min_step) {
      for (std::size_t i = 0; i < P.m; ++i)
        xt[i] = x[i] + step * delta[i];
      const double mut = mu + step * dmu;
      const double mt = evaluate(xt, mut, ct, phit, Ft);
      if (std::isfinite(mt) && mt < merit) {
        x = xt;
        mu = mut;
        phi = std::move(phit);
        F = std::move(Ft);
        c = ct;
        merit = mt;
        moved = true;
        break;
      }
      step *= cfg.newton.backtrack;
    }
    if (!moved)
      break;
    res.iterations = it + 1;
  }
  res.gnorm = P.norm_residual(F);
  if (!res.converged && res.gnorm < cfg.grad_tol &&
      std::abs(four_pi * c) < 1e-13)
    res.converged = true;
  res.x = std::move(x);
  res.mu = mu;
  return res;
}

struct ScfResult {
  std::vector<double> x;
  double mu = 0.0;
  int iterations = 0;
  double change = 0.0;
  std::optional<NewtonResult> finished;
};

/// Called with the current SCF iterate; returns a Newton result to stop.
using ScfFinisher =
    std::function<std::optional<NewtonResult>(const std::vector<double> &, double)>;

/// Sturm-selected zero-energy eigenvector of -Delta + phi - s nu for frozen
/// (phi, nu); s is tuned so that eigenvalue number k vanishes.
struct FrozenEigen {
  const Problem &P;
  std::span<const double> phi;
  std::span<const double> nu;
  int k;

  linalg::Eigenpair at(double s) const {
    linalg::SymTridiag T;
    T.diag.resize(P.m);
    T.off.resize(P.m - 1);
    for (std::size_t i = 0; i < P.m; ++i)
      T.diag[i] = P.K.diag[i] / P.w[i] + phi[i] - s * nu[i];
    for (std::size_t i = 0; i + 1 < P.m; ++i)
      T.off[i] = P.K.off[i] / std::sqrt(P.w[i] * P.w[i + 1]);
    return linalg::eigenpair_by_index(T, k);
  }

  linalg::Eigenpair zero_crossing(double s0, double &s_out) const {
    double lo = 0.0, hi = std::max(s0, 1e-3);
    auto e = at(hi);
    while (e.value > 0.0) {
      lo = hi;
      hi *= 2.0;
      e = at(hi);
      if (hi > 1e12)
        throw DomainError("no zero-energy state for the frozen potential");
    }
    double s = hi;
    for (int it = 0; it < 40 && e.value != 0.0; ++it) {
      double deriv = 0.0;
      for (std::size_t i = 0; i < P.m; ++i)
        deriv -= nu[i] * e.vector[i] * e.vector[i];
      if (e.value > 0.0)
        lo = s;
      else
        hi = s;
      double next = deriv < 0.0 ? s - e.value / deriv : 0.5 * (lo + hi);
      if (!(next > lo && next < hi))
        next = 0.5 * (lo + hi);
      if (std::abs(next - s) <= 1e-7 * s || hi - lo <= 1e-12 * hi) {
        s = next;
        e = at(s);
        break;
      }
      s = next;
      e = at(s);
    }
    s_out = s;
    return e;
  }
};

/// Damped SCF; once the change drops below scf_tol the finisher is tried,
/// then again every few iterations until it succeeds.
ScfResult scf_solve(const Problem &P, std::vector<double> x, int k,
                    const SolverConfig &cfg, const ScfFinisher &finish) {
  constexpr int retry_every = 5;
  // a fixed point the finisher keeps rejecting will not improve with more SCF
  constexpr int max_attempts = 10;
  int last_try = -retry_every, attempts = 0;
  const double p = P.p;
  auto nu_of = [&](std::span<const double> xs) {
    std::vector<double> nu(P.m);
    for (std::size_t i = 0; i < P.m; ++i)
      nu[i] = std::pow(std::abs(xs[i]), p - 1.0);
    return nu;
  };
  auto rel_change = [&](std::span<const double> a, std::span<const double> b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < P.m; ++i) {
      num += P.w[i] * (a[i] - b[i]) * (a[i] - b[i]);
      den += P.w[i] * b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  };

  ScfResult res;
  std::vector<double> phi = P.potential(x);
  std::vector<double> nu = nu_of(x);
  double s = 1.0;
  double alpha = cfg.scf_damping;
  double prev_change = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_outer_iter; ++it) {
    FrozenEigen fe{P, phi, nu, k};
    auto e = fe.zero_crossing(s, s);
    std::vector<double> v(P.m);
    for (std::size_t i = 0; i < P.m; ++i)
      v[i] = e.vector[i] / std::sqrt(P.w[i]);
    double overlap = 0.0;
    for (std::size_t i = 0; i < P.m; ++i)
      overlap += P.w[i] * v[i] * x[i];
    if (overlap < 0.0)
      for (double &y : v)
        y = -y;
    P.normalize(v);
    const auto phi_new = P.potential(v);
    const auto nu_new = nu_of(v);
    res.change = rel_change(phi_new, phi) + rel_change(nu_new, nu);
    if (res.change > prev_change)
      alpha = std::max(0.5 * alpha, 0.01);
    else
      alpha = std::min(1.1 * alpha, cfg.scf_damping);
    prev_change = res.change;
    for (std::size_t i = 0; i < P.m; ++i) {
      phi[i] = (1.0 - alpha) * phi[i] + alpha * phi_new[i];
      nu[i] = (1.0 - alpha) * nu[i] + alpha * nu_new[i];
    }
    x = std::move(v);
    res.iterations = it + 1;
    if (res.change < cfg.scf_tol && it - last_try >= retry_every) {
      last_try = it;
      res.finished = finish(x, s);
      if (res.finished || ++attempts == max_attempts)
        break;
    }
  }
  res.x = std::move(x);
  // multiplier consistent with the current shape: mu = M(x) on the manifold
  res.mu = s;
  return res;
}

std::vector<std::vector<double>>
deflation_states(const Problem &P, std::span<const SolutionRecord> known) {
  std::vector<std::vector<double>> out;
  const RadialGrid &G = *P.grid;
  for (const auto &rec : known) {
    const RadialGrid &R = rec.u.grid();
    if (rec.p != P.p || R.intervals() != G.intervals() ||
        R.r_max() != G.r_max() || R.gamma() != G.gamma())
      continue;
    out.push_back(P.state(rec.u));
  }
  return out;
}

} // namespace

RadialField make_seed(const GridPtr &grid, const SeedOptions &seed, int k,
                      double p) {
  if (k < 0)
    throw ConfigError("node count must be >= 0");
  if (!(seed.width > 0.0) || !(seed.spacing > 0.0))
    throw ConfigError("seed width and spacing must be positive");
  const double w = seed.width;
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  RadialField u = RadialField::sample(grid, [&](double r) {
    double v = seed.amplitude * std::exp(-r * r / (w * w));
    for (int j = 1; j <= k; ++j)
      v *= (r - j * w * seed.spacing);
    return sign * v;
  });
  u.mutable_values().back() = 0.0;
  const double c = lp_integral(u, p + 1.0);
  if (!(c > 0.0) || !std::isfinite(c))
    throw ConfigError("seed is zero after normalisation");
  const double s = std::pow(c, -1.0 / (p + 1.0));
  for (double &v : u.mutable_values())
    v *= s;
  return u;
}

SolutionRecord minimize_on_manifold(const SolverConfig &config) {
  config.validate();
  const double p = config.p;
  const GridPtr grid = config.grid.build();
  const Problem P(grid, p);

  std::vector<double> x =
      P.state(make_seed(grid, config.seed, config.seed.node_count, p));

  std::vector<double> phi, gJ;
  double J = P.manifold_energy(x, phi, gJ);
  std::deque<double> history{J};
  constexpr std::size_t memory = 10;
  constexpr double armijo = 1e-4;

  std::vector<double> G_prev, x_prev;
  double tau = 1.0;
  int it = 0;
  double gnorm = std::numeric_limits<double>::infinity();
  double mu = 0.0;
  for (; it < config.max_outer_iter; ++it) {
    const auto a = P.nonlinearity(x);
    // mu = M(x) on the manifold: <x, gJ> = M / (4 pi), <x, a> = 1 / (4 pi)
    mu = four_pi * dot(x, gJ);
    std::vector<double> R(P.m);
    for (std::size_t i = 0; i < P.m; ++i)
      R[i] = gJ[i] - mu * a[i];
    gnorm = P.norm_residual(R);
    if (gnorm < config.grad_tol)
      break;

    const auto Pc = P.preconditioner(phi);
    const auto dg = linalg::solve(Pc, gJ);
    const auto da = linalg::solve(Pc, a);
    const double lambda = dot(a, dg) / dot(a, da);
    std::vector<double> dir(P.m), G(P.m);
    for (std::size_t i = 0; i < P.m; ++i) {
      dir[i] = dg[i] - lambda * da[i];
      G[i] = gJ[i] - lambda * a[i];
    }
    const double slope = dot(gJ, dir);

    if (!G_prev.empty()) {
      std::vector<double> s(P.m), y(P.m);
      for (std::size_t i = 0; i < P.m; ++i) {
        s[i] = x[i] - x_prev[i];
        y[i] = G[i] - G_prev[i];
      }
      const double sy = dot(s, y);
      const double sPs = dot(s, Pc.apply(s));
      tau = sy > 0.0 ? std::clamp(sPs / sy, 1e-6, 1e6) : 1.0;
    }

    const double ref = *std::max_element(history.begin(), history.end());
    std::vector<double> xt(P.m), phit, gt;
    double Jt = 0.0;
    double step = tau;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < P.m; ++i)
        xt[i] = x[i] - step * dir[i];
      if (P.normalize(xt)) {
        Jt = P.manifold_energy(xt, phit, gt);
        if (std::isfinite(Jt) && Jt <= ref - armijo * step * slope) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted)
      break;
    x_prev = x;
    G_prev = std::move(G);
    x = xt;
    phi = std::move(phit);
    gJ = std::move(gt);
    J = Jt;
    history.push_back(J);
    if (history.size() > memory)
      history.pop_front();
  }

  P.normalize(x);
  std::vector<double> phi_final, g_final;
  P.manifold_energy(x, phi_final, g_final);
  mu = four_pi * dot(x, g_final);
  SolutionRecord rec = make_record(P.field(x), p, mu, "spg-manifold", it, true,
                                   config.grad_tol);
  if (!(rec.residuals.gradient < config.grad_tol))
    throw NonConvergence("spectral projected gradient did not reach the "
                         "gradient tolerance",
                         std::move(rec));
  return rec;
}

SolutionRecord bound_state(const SolverConfig &config, int k,
                           std::span<const SolutionRecord> known) {
  config.validate();
  if (k < 0)
    throw ConfigError("node count must be >= 0");
  if (!(config.p > 1.0))
    throw ConfigError("exponent p must exceed 1");
  const double p = config.p;
  const GridPtr grid = config.grid.build();
  const Problem P(grid, p);

  std::vector<double> x = P.state(make_seed(grid, config.seed, k, p));
  const auto deflate = deflation_states(P, known);
  NewtonResult last;
  auto finish = [&](const std::vector<double> &xs,
                    double s) -> std::optional<NewtonResult> {
    last = newton_solve(P, xs, s, true, config, deflate);
    if (last.converged && count_nodes(P.field(last.x)) == k)
      return last;
    return std::nullopt;
  };
  ScfResult scf = scf_solve(P, std::move(x), k, config, finish);
  NewtonResult nr = scf.finished ? *scf.finished
                    : last.x.empty()
                        ? newton_solve(P, scf.x, scf.mu, true, config, deflate)
                        : last;
  P.normalize(nr.x);

  std::vector<double> phi, gJ;
  P.manifold_energy(nr.x, phi, gJ);
  const double mu = four_pi * dot(nr.x, gJ);
  RadialField u = P.field(nr.x);
  SolutionRecord rec =
      make_record(std::move(u), p, mu, "scf+bordered-newton",
                  scf.iterations + nr.iterations, true, config.grad_tol);

  for (const auto &xj : deflate) {
    double diff_plus = 0.0, diff_minus = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < P.m; ++i) {
      const double ui = rec.u[i];
      diff_plus += P.w[i] * (ui - xj[i]) * (ui - xj[i]);
      diff_minus += P.w[i] * (ui + xj[i]) * (ui + xj[i]);
      ref += P.w[i] * xj[i] * xj[i];
    }
    if (std::min(diff_plus, diff_minus) <= 1e-12 * ref)
      rec.duplicate = true;
  }

  if (!nr.converged || !(rec.residuals.gradient < config.grad_tol))
    throw NonConvergence("bordered Newton did not converge for k = " +
                             std::to_string(k),
                         std::move(rec));
  if (rec.node_count != k) {
    rec.wrong_branch = true;
    throw WrongBranch("converged to " + std::to_string(rec.node_count) +
                          " nodes, requested " + std::to_string(k),
                      std::move(rec));
  }
  return rec;
}

SolutionRecord lagrange_rescale(const SolutionRecord &rec, double mu_target,
                                const SolverConfig &config) {
  if (rec.p == 2.0)
    throw InvarianceError(
        "p = 2: the dilation u -> lambda^2 u(lambda x) leaves the multiplier "
        "unchanged, so it cannot be removed by rescaling");
  if (!(mu_target > 0.0) || !std::isfinite(mu_target))
    throw ConfigError("mu_target must be positive");
  const double p = rec.p;
  const double lambda = std::pow(rec.mu / mu_target, 1.0 / (2.0 * p - 4.0));
  if (lambda == 1.0)
    return rec;

  const auto scaled = rescale_field(rec.u, lambda);
  const Problem P(rec.u.grid_ptr(), p);
  SolverConfig cfg = config;
  cfg.grad_tol = rec.grad_tol;
  NewtonResult nr = newton_solve(P, P.state(scaled.field), mu_target, false,
                                 cfg, {});
  SolutionRecord out = make_record(P.field(nr.x), p, mu_target,
                                   rec.method + "+rescale-newton",
                                   rec.iterations + nr.iterations, false,
                                   rec.grad_tol);
  if (!is_accepted(out, 10.0) || out.node_count != rec.node_count)
    throw NonConvergence("rescaled record failed re-verification" +
                             std::string(scaled.truncated
                                             ? " (profile truncated at r_max)"
                                             : ""),
                         std::move(out));
  return out;
}

GroundStateSplit ground_state_split(const EnergyBreakdown &e) {
  const double p = e.p;
  if (p == 2.0)
    throw DomainError("energy split is singular at p = 2");
  GroundStateSplit s;
  s.c = e.I;
  s.A_pred = (5.0 * p - 7.0) / (2.0 * (p - 2.0)) * s.c;
  s.B_pred = (5.0 - p) / (p - 2.0) * s.c;
  s.muC_pred = 3.0 * (p + 1.0) / (2.0 * (p - 2.0)) * s.c;
  auto rel = [](double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
  };
  s.max_rel_error = std::max({rel(e.A, s.A_pred), rel(e.B, s.B_pred),
                              rel(e.mu * e.C, s.muC_pred)});
  return s;
}

SolutionRecord ground_state(const SolverConfig &config) {
  if (!(config.p > 2.0 && config.p < 5.0))
    throw DomainError(config.p >= 5.0
                          ? "p >= 5: no nontrivial solution exists"
                          : "ground states are computed for p in (2, 5)");
  SolverConfig cfg = config;
  cfg.seed.node_count = 0;
  SolutionRecord manifold = minimize_on_manifold(cfg);
  SolutionRecord rec = lagrange_rescale(manifold, config.mu_target, cfg);

  const auto split = ground_state_split(rec.breakdown);
  std::vector<double> ts;
  for (int i = 500; i <= 1500; ++i)
    ts.push_back(i * 1e-3);
  const auto path = virial_path(rec.breakdown, ts);
  if (split.max_rel_error > 1e-3)
    throw VerificationError("A/B/C split off by " +
                                std::to_string(split.max_rel_error),
                            std::move(rec));
  if (!path.argmax || std::abs(*path.argmax - 1.0) > 1e-3)
    throw VerificationError("dilation path is not maximised at t = 1",
                            std::move(rec));
  return rec;
}

P2Eigen p2_eigen(const SolverConfig &config, int k) {
  if (config.p != 2.0)
    throw DomainError("p2 mode requires p = 2");
  if (k < 0)
    throw ConfigError("node count must be >= 0");
  SolverConfig cfg = config;
  cfg.seed.node_count = k;
  P2Eigen out;
  out.record = k == 0 ? minimize_on_manifold(cfg) : bound_state(cfg, k);
  const auto &e = out.record.breakdown;
  out.mu = out.record.mu;
  out.margin = out.mu - 2.0;
  out.mu_over_b = out.mu / out.record.b_level;
  out.zero_energy = std::abs(e.I) / e.M;
  return out;
}

SolutionRecord p2_family_member(const SolutionRecord &rec, double lambda) {
  if (rec.p != 2.0)
    throw DomainError("the multiplier-preserving family exists only at p = 2");
  if (!(lambda > 0.0))
    throw DomainError("lambda must be positive");
  const RadialField v = regrid_scaled((lambda * lambda) * rec.u, 1.0 / lambda);
  SolutionRecord out =
      make_record(v, rec.p, rec.mu,
                  rec.method + "+dilation", rec.iterations, false,
                  rec.grad_tol);
  if (!is_accepted(out, 10.0))
    throw VerificationError("dilated p = 2 solution failed re-verification",
                            std::move(out));
  return out;
}

ProbeReport nonexistence_probe(double p, double mu,
                               const SolverConfig &config) {
  const bool supercritical = p >= 5.0;
  const bool p2_subcritical = p == 2.0 && mu > 0.0 && mu < 2.0;
  if (!supercritical && !p2_subcritical)
    throw ConfigError("probe runs only for p >= 5, or p = 2 with mu < 2");
  if (!(mu > 0.0))
    throw ConfigError("coupling mu must be positive");

  const GridPtr grid = config.grid.build();
  const Problem P(grid, p);
  RadialField seed = RadialField::sample(grid, [&](double r) {
    const double w = config.seed.width;
    return config.seed.amplitude * std::exp(-r * r / (w * w));
  });
  std::vector<double> x = P.state(seed);

  auto breakdown = [&](std::span<const double> xs) {
    const RadialField f = P.field(xs);
    return EnergyBreakdown::from_parts(dirichlet_energy(f), coulomb_energy(f),
                                       lp_integral(f, p + 1.0), p, mu);
  };
  auto max_abs = [](std::span<const double> xs) {
    double m = 0.0;
    for (double v : xs)
      m = std::max(m, std::abs(v));
    return m;
  };

  ProbeReport rep;
  rep.p = p;
  rep.mu = mu;
  auto e = breakdown(x);
  rep.M_initial = e.M;
  rep.C_initial = e.C;
  rep.max_initial = max_abs(x);
  rep.outcome = "exhausted";

  int it = 0;
  for (; it < config.max_outer_iter; ++it) {
    const auto phi = P.potential(x);
    const auto F = P.residual(x, phi, mu);
    const double gn = P.norm_residual(F);
    if (e.M < 1e-10 * rep.M_initial) {
      rep.outcome = "collapse";
      break;
    }
    if (max_abs(x) > 1e8 * rep.max_initial || e.C > 1e12 * rep.C_initial) {
      rep.outcome = "blowup";
      break;
    }
    if (gn < config.grad_tol) {
      rep.outcome = "stationary";
      break;
    }
    const auto dir = linalg::solve(P.preconditioner(phi), F);
    const double slope = four_pi * dot(F, dir);
    double step = 1.0;
    bool moved = false;
    std::vector<double> xt(P.m);
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < P.m; ++i)
        xt[i] = x[i] - step * dir[i];
      const auto et = breakdown(xt);
      if (std::isfinite(et.I) && et.I <= e.I - 1e-4 * step * slope) {
        x = xt;
        e = et;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved)
      break;
  }
  rep.iterations = it;
  rep.M_final = e.M;
  rep.C_final = e.C;
  rep.I_final = e.I;
  rep.max_final = max_abs(x);

  if (p <= 5.0 && e.M > min_M) {
    const SolutionRecord candidate = make_record(
        P.field(x), p, mu, "probe-flow", it, false, config.grad_tol);
    rep.accepted_record = is_accepted(candidate);
  }
  return rep;
}

} // namespace sps
