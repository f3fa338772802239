#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace sps {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double four_pi = 4.0 * pi;

/// Graded radial mesh r_i = r_max (i/n)^gamma, i = 0..n, with node weights
/// w_i approximating int_0^{r_max} f(r) r^2 dr by sum_i w_i f(r_i).
///
/// The first cell uses the hat functions; the rest is the trapezoid rule in
/// xi = (r/r_max)^{1/gamma} with the 3/8, 7/6, 23/24 end corrections. The
/// rule is fourth order in 1/n for smooth f, and exact for f = 1 and f = r
/// on uniform grids.
class RadialGrid {
public:
  static std::shared_ptr<const RadialGrid> make(std::size_t n, double r_max,
                                                double gamma);

  std::size_t intervals() const { return n_; }
  std::size_t size() const { return nodes_.size(); }
  double r_max() const { return r_max_; }
  double gamma() const { return gamma_; }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  double r(std::size_t i) const { return nodes_[i]; }
  double w(std::size_t i) const { return weights_[i]; }

  /// Cell width r_{i+1} - r_i.
  double h(std::size_t i) const { return widths_[i]; }
  /// Cell volume (r_{i+1}^3 - r_i^3)/3, evaluated without cancellation.
  double cell_volume(std::size_t i) const { return volumes_[i]; }
  /// (dr/dxi)/n at node i, the local spacing of the mapped trapezoid rule.
  double spacing(std::size_t i) const { return spacing_[i]; }

private:
  RadialGrid() = default;

  std::size_t n_ = 0;
  double r_max_ = 0.0;
  double gamma_ = 1.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> widths_;
  std::vector<double> volumes_;
  std::vector<double> spacing_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Samples of a radial function on a grid.
class RadialField {
public:
  RadialField() = default;
  explicit RadialField(GridPtr grid);
  RadialField(GridPtr grid, std::vector<double> values);

  template <class F> static RadialField sample(GridPtr grid, F &&f) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = f(grid->r(i));
    return RadialField(std::move(grid), std::move(v));
  }

  const RadialGrid &grid() const { return *grid_; }
  const GridPtr &grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::vector<double> &mutable_values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double max_abs() const;

private:
  GridPtr grid_;
  std::vector<double> values_;
};

RadialField operator+(const RadialField &a, const RadialField &b);
RadialField operator-(const RadialField &a, const RadialField &b);
RadialField operator*(double s, const RadialField &a);
/// Pointwise product.
RadialField operator*(const RadialField &a, const RadialField &b);

std::shared_ptr<const RadialGrid> make_grid(std::size_t n, double r_max,
                                            double gamma);

/// 4 pi sum_i w_i f(r_i), the integral over R^3 of a radial function.
double integrate(const RadialField &f);

/// Three-point second-order differences on the nonuniform mesh, one-sided at
/// both ends.
RadialField radial_derivative(const RadialField &u);

struct RescaleResult {
  RadialField field;
  /// Source did not decay below 1e-12 max|u| before r_max / max(t, 1).
  bool truncated = false;
};

/// u_t(r) = t^2 u(t r), monotone cubic interpolation on the source grid,
/// zero beyond r_max.
RescaleResult rescale_field(const RadialField &u, double t);

/// Same values on the grid with every radius multiplied by `factor`.
RadialField regrid_scaled(const RadialField &u, double factor);

} // namespace sps
