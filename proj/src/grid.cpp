#include "sps/grid.hpp"

#include "sps/errors.hpp"

// pchip.hpp calls unqualified isnan
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace sps {

std::shared_ptr<const RadialGrid> RadialGrid::make(std::size_t n, double r_max,
                                                   double gamma) {
  if (n < 16)
    throw ConfigError("grid needs at least 16 intervals, got " +
                      std::to_string(n));
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw ConfigError("grid r_max must be positive and finite");
  if (!(gamma >= 1.0) || !std::isfinite(gamma))
    throw ConfigError("grid grading exponent must be >= 1");

  std::shared_ptr<RadialGrid> g(new RadialGrid());
  g->n_ = n;
  g->r_max_ = r_max;
  g->gamma_ = gamma;
  g->nodes_.resize(n + 1);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / dn;
    g->nodes_[i] = gamma == 1.0 ? r_max * x : r_max * std::pow(x, gamma);
  }
  g->nodes_[0] = 0.0;
  g->nodes_[n] = r_max;

  g->widths_.resize(n);
  g->volumes_.resize(n);
  g->spacing_.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = g->nodes_[i];
    const double h = g->nodes_[i + 1] - a;
    if (!(h > 0.0))
      throw ConfigError("grid nodes are not strictly increasing");
    g->widths_[i] = h;
    g->volumes_[i] = h * (a * a + a * h + h * h / 3.0);
  }
  // dr/dxi / n with xi = i/n; r = r_max xi^gamma gives gamma r_i / i
  for (std::size_t i = 1; i <= n; ++i)
    g->spacing_[i] = gamma * g->nodes_[i] / static_cast<double>(i);
  g->spacing_[0] = gamma == 1.0 ? r_max / dn : 0.0;

  // First cell: hat functions against r^2 dr. Beyond it: end-corrected
  // trapezoid in xi on f r^2 dr/dxi, fourth order.
  g->weights_.assign(n + 1, 0.0);
  const double r1 = g->nodes_[1];
  g->weights_[0] = r1 * r1 * r1 / 12.0;
  g->weights_[1] = r1 * r1 * r1 / 4.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t e = std::min(i - 1, n - i);
    const double c = e == 0 ? 3.0 / 8.0 : e == 1 ? 7.0 / 6.0 : e == 2 ? 23.0 / 24.0 : 1.0;
    const double r = g->nodes_[i];
    g->weights_[i] += c * r * r * g->spacing_[i];
  }
  return g;
}

std::shared_ptr<const RadialGrid> make_grid(std::size_t n, double r_max,
                                            double gamma) {
  return RadialGrid::make(n, r_max, gamma);
}

RadialField::RadialField(GridPtr grid)
    : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}

RadialField::RadialField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_)
    throw ConfigError("field without grid");
  if (values_.size() != grid_->size())
    throw ConfigError("field length " + std::to_string(values_.size()) +
                      " does not match grid size " +
                      std::to_string(grid_->size()));
  for (double v : values_)
    if (!std::isfinite(v))
      throw DomainError("field contains a non-finite value");
}

double RadialField::max_abs() const {
  double m = 0.0;
  for (double v : values_)
    m = std::max(m, std::abs(v));
  return m;
}

namespace {

template <class Op>
RadialField combine(const RadialField &a, const RadialField &b, Op op) {
  if (a.grid_ptr() != b.grid_ptr())
    throw ConfigError("fields live on different grids");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = op(a[i], b[i]);
  return RadialField(a.grid_ptr(), std::move(v));
}

} // namespace

RadialField operator+(const RadialField &a, const RadialField &b) {
  return combine(a, b, [](double x, double y) { return x + y; });
}

RadialField operator-(const RadialField &a, const RadialField &b) {
  return combine(a, b, [](double x, double y) { return x - y; });
}

RadialField operator*(const RadialField &a, const RadialField &b) {
  return combine(a, b, [](double x, double y) { return x * y; });
}

RadialField operator*(double s, const RadialField &a) {
  std::vector<double> v(a.values().begin(), a.values().end());
  for (double &x : v)
    x *= s;
  return RadialField(a.grid_ptr(), std::move(v));
}

double integrate(const RadialField &f) {
  const auto w = f.grid().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    s += w[i] * f[i];
  return four_pi * s;
}

RadialField radial_derivative(const RadialField &u) {
  const RadialGrid &g = u.grid();
  const std::size_t n = g.intervals();
  std::vector<double> d(g.size());

  {
    const double h1 = g.h(0), h2 = g.h(1);
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * u[0] +
           (h1 + h2) / (h1 * h2) * u[1] - h1 / (h2 * (h1 + h2)) * u[2];
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double h1 = g.h(i - 1), h2 = g.h(i);
    d[i] = -h2 / (h1 * (h1 + h2)) * u[i - 1] + (h2 - h1) / (h1 * h2) * u[i] +
           h1 / (h2 * (h1 + h2)) * u[i + 1];
  }
  {
    const double h1 = g.h(n - 2), h2 = g.h(n - 1);
    d[n] = (2.0 * h2 + h1) / (h2 * (h1 + h2)) * u[n] -
           (h1 + h2) / (h1 * h2) * u[n - 1] + h2 / (h1 * (h1 + h2)) * u[n - 2];
  }
  return RadialField(u.grid_ptr(), std::move(d));
}

RescaleResult rescale_field(const RadialField &u, double t) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw DomainError("rescale factor must be positive");
  const RadialGrid &g = u.grid();
  RescaleResult out;
  if (t == 1.0) {
    out.field = u;
    return out;
  }

  const double umax = u.max_abs();
  const double r_cut = g.r_max() / std::max(t, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.r(i) >= r_cut && std::abs(u[i]) > 1e-12 * umax) {
      out.truncated = true;
      break;
    }

  std::vector<double> x(g.nodes().begin(), g.nodes().end());
  std::vector<double> y(u.values().begin(), u.values().end());
  boost::math::interpolators::pchip<std::vector<double>> spline(std::move(x),
                                                                std::move(y));
  std::vector<double> v(g.size(), 0.0);
  const double t2 = t * t;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = t * g.r(i);
    if (s <= g.r_max())
      v[i] = t2 * spline(s);
  }
  out.field = RadialField(u.grid_ptr(), std::move(v));
  return out;
}

RadialField regrid_scaled(const RadialField &u, double factor) {
  const RadialGrid &g = u.grid();
  auto scaled = make_grid(g.intervals(), g.r_max() * factor, g.gamma());
  std::vector<double> v(u.values().begin(), u.values().end());
  return RadialField(std::move(scaled), std::move(v));
}

} // namespace sps
