#include "sps/linalg.hpp"

#include "sps/errors.hpp"

#include <lapacke.h>

#include <string>

namespace sps::linalg {

std::vector<double> SymTridiag::apply(std::span<const double> x) const {
  const std::size_t n = size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0)
      s += off[i - 1] * x[i - 1];
    if (i + 1 < n)
      s += off[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

std::vector<double> solve(const SymTridiag &t, std::span<const double> rhs) {
  const lapack_int n = static_cast<lapack_int>(t.size());
  std::vector<double> dl(t.off), du(t.off), d(t.diag);
  std::vector<double> b(rhs.begin(), rhs.end());
  const lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, n, 1, dl.data(),
                                        d.data(), du.data(), b.data(), n);
  if (info != 0)
    throw DomainError("tridiagonal solve failed, info = " +
                      std::to_string(info));
  return b;
}

Eigenpair eigenpair_by_index(const SymTridiag &t, int index) {
  const lapack_int n = static_cast<lapack_int>(t.size());
  if (index < 0 || index >= n)
    throw DomainError("eigenpair index out of range");
  std::vector<double> d(t.diag), e(t.off);
  e.push_back(0.0);
  lapack_int found = 0;
  std::vector<double> w(1), z(static_cast<std::size_t>(n));
  std::vector<lapack_int> support(2);
  const lapack_int il = index + 1;
  const lapack_int info =
      LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0,
                     0.0, il, il, 0.0, &found, w.data(), z.data(), n,
                     support.data());
  if (info != 0 || found != 1)
    throw DomainError("tridiagonal eigensolver failed, info = " +
                      std::to_string(info));
  return {w[0], std::move(z)};
}

namespace {

constexpr int kl = 2;
constexpr int ku = 2;
constexpr int ldab = 2 * kl + ku + 1;

} // namespace

CoupledSolver::CoupledSolver(const SymTridiag &t, std::span<const double> d,
                             std::span<const double> g)
    : n_(t.size()) {
  const std::size_t m = 2 * n_;
  band_.assign(ldab * m, 0.0);
  pivots_.resize(m);
  // LAPACK band storage: A(i,j) -> ab[kl + ku + i - j + j*ldab]
  auto at = [&](std::size_t i, std::size_t j) -> double & {
    return band_[kl + ku + i - j + j * ldab];
  };

  std::vector<double> inv_delta(n_);
  for (std::size_t l = 0; l + 1 < n_; ++l)
    inv_delta[l] = 1.0 / (g[l] - g[l + 1]);
  inv_delta[n_ - 1] = 1.0 / g[n_ - 1];

  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t rx = 2 * i, ry = 2 * i + 1;
    // T x + 2 D y = b
    at(rx, rx) = t.diag[i];
    if (i > 0)
      at(rx, rx - 2) = t.off[i - 1];
    if (i + 1 < n_)
      at(rx, rx + 2) = t.off[i];
    at(rx, ry) = 2.0 * d[i];
    // G^{-1} y - D x = 0
    at(ry, ry) = inv_delta[i] + (i > 0 ? inv_delta[i - 1] : 0.0);
    if (i > 0)
      at(ry, ry - 2) = -inv_delta[i - 1];
    if (i + 1 < n_)
      at(ry, ry + 2) = -inv_delta[i];
    at(ry, rx) = -d[i];
  }

  const lapack_int info =
      LAPACKE_dgbtrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(m),
                     static_cast<lapack_int>(m), kl, ku, band_.data(), ldab,
                     pivots_.data());
  if (info != 0)
    throw DomainError("coupled Jacobian is singular, info = " +
                      std::to_string(info));
}

std::vector<double> CoupledSolver::solve(std::span<const double> b) const {
  const std::size_t m = 2 * n_;
  std::vector<double> z(m, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    z[2 * i] = b[i];
  const lapack_int info = LAPACKE_dgbtrs(
      LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(m), kl, ku, 1,
      band_.data(), ldab, pivots_.data(), z.data(), static_cast<lapack_int>(m));
  if (info != 0)
    throw DomainError("coupled back-substitution failed");
  std::vector<double> x(n_);
  for (std::size_t i = 0; i < n_; ++i)
    x[i] = z[2 * i];
  return x;
}

std::vector<double> CoupledSolver::apply(const SymTridiag &t,
                                         std::span<const double> d,
                                         std::span<const double> g,
                                         std::span<const double> x) {
  const std::size_t n = t.size();
  std::vector<double> y = t.apply(x);
  // (G D x)_i = g_i sum_{j<=i} d_j x_j + sum_{j>i} g_j d_j x_j
  std::vector<double> outer(n, 0.0);
  for (std::size_t k = n - 1; k-- > 0;)
    outer[k] = outer[k + 1] + g[k + 1] * d[k + 1] * x[k + 1];
  double inner = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inner += d[i] * x[i];
    y[i] += 2.0 * d[i] * (g[i] * inner + outer[i]);
  }
  return y;
}

} // namespace sps::linalg
