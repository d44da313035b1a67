#pragma once

// Scalar-generic geometry kernels. Every kernel is instantiated for T = double
// and T = D1; derivatives are taken by evaluating inputs one dual level up.

#include <cmath>
#include <span>
#include <vector>

#include "gnb/dual.hpp"
#include "gnb/error.hpp"
#include "gnb/manifold.hpp"

namespace gnb::kernels {

template <class T>
using Vector = std::vector<T>;

template <class T>
Vector<Dual<T>> seed(std::span<const T> x, std::span<const T> dir) {
  Vector<Dual<T>> out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.emplace_back(x[i], dir[i]);
  return out;
}

template <class T>
Vector<Dual<T>> seed_axis(std::span<const T> x, int axis) {
  Vector<Dual<T>> out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.emplace_back(x[i], T(static_cast<int>(i) == axis ? 1.0 : 0.0));
  return out;
}

template <class T>
Vector<T> values(const Vector<Dual<T>>& v) {
  Vector<T> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].val;
  return out;
}

template <class T>
Vector<T> tangents(const Vector<Dual<T>>& v) {
  Vector<T> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].eps;
  return out;
}

/// Value and directional derivative of a smooth map along `dir`.
template <class T>
void jet(const SmoothMap& f, std::span<const T> x, std::span<const T> dir, Vector<T>& value, Vector<T>& deriv) {
  auto xd = seed<T>(x, dir);
  auto y = f(std::span<const Dual<T>>(xd));
  value = values(y);
  deriv = tangents(y);
}

template <class T>
T inner(const Vector<T>& g, const Vector<T>& a, const Vector<T>& b) {
  const std::size_t n = a.size();
  T s(0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * a[i] * b[j];
  return s;
}

/// Gauss-Jordan inverse with partial pivoting on the real part.
template <class T>
Vector<T> inverse(Vector<T> a, int n) {
  Vector<T> inv(static_cast<std::size_t>(n * n), T(0.0));
  for (int i = 0; i < n; ++i) inv[i * n + i] = T(1.0);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(value_of(a[r * n + c])) > std::abs(value_of(a[piv * n + c]))) piv = r;
    if (value_of(a[piv * n + c]) == 0.0) throw Error(ErrorCode::SingularMetric, "zero pivot in metric inverse");
    if (piv != c) {
      for (int k = 0; k < n; ++k) {
        std::swap(a[c * n + k], a[piv * n + k]);
        std::swap(inv[c * n + k], inv[piv * n + k]);
      }
    }
    T d = T(1.0) / a[c * n + c];
    for (int k = 0; k < n; ++k) {
      a[c * n + k] = a[c * n + k] * d;
      inv[c * n + k] = inv[c * n + k] * d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      T f = a[r * n + c];
      if (value_of(f) == 0.0) continue;
      for (int k = 0; k < n; ++k) {
        a[r * n + k] = a[r * n + k] - f * a[c * n + k];
        inv[r * n + k] = inv[r * n + k] - f * inv[c * n + k];
      }
    }
  }
  return inv;
}

/// Metric components g (n*n) and first partials dg[(m*n + i)*n + j] = ∂_m g_ij.
template <class T>
void metric_jet(const ChartManifold& M, std::span<const T> x, Vector<T>& g, Vector<T>& dg) {
  const int n = M.dim();
  dg.assign(static_cast<std::size_t>(n * n * n), T(0.0));
  for (int m = 0; m < n; ++m) {
    auto xd = seed_axis<T>(x, m);
    auto gd = M.metric<Dual<T>>(std::span<const Dual<T>>(xd));
    if (m == 0) g = values(gd);
    for (int k = 0; k < n * n; ++k) dg[m * n * n + k] = gd[k].eps;
  }
}

/// Γ^k_ij = ½ g^kl (∂_i g_jl + ∂_j g_il − ∂_l g_ij), stored [k][i][j].
template <class T>
Vector<T> christoffel_from(const Vector<T>& g, const Vector<T>& dg, int n) {
  Vector<T> gi = inverse(g, n);
  auto d = [&](int m, int i, int j) -> const T& { return dg[(m * n + i) * n + j]; };
  Vector<T> first(static_cast<std::size_t>(n * n * n), T(0.0));  // [l][i][j]
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) first[(l * n + i) * n + j] = 0.5 * (d(i, j, l) + d(j, i, l) - d(l, i, j));
  Vector<T> gam(static_cast<std::size_t>(n * n * n), T(0.0));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        T s(0.0);
        for (int l = 0; l < n; ++l) s += gi[k * n + l] * first[(l * n + i) * n + j];
        gam[(k * n + i) * n + j] = s;
      }
  return gam;
}

template <class T>
Vector<T> christoffel(const ChartManifold& M, std::span<const T> x) {
  Vector<T> g, dg;
  metric_jet(M, x, g, dg);
  return christoffel_from(g, dg, M.dim());
}

/// Γ^k_ij X^i Y^j
template <class T>
Vector<T> contract(const Vector<T>& gam, const Vector<T>& X, const Vector<T>& Y) {
  const std::size_t n = X.size();
  Vector<T> out(n, T(0.0));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[k] += gam[(k * n + i) * n + j] * X[i] * Y[j];
  return out;
}

/// (∇_X Z)^k = X(Z^k) + Γ^k_ij X^i Z^j, with precomputed Γ at x.
template <class T>
Vector<T> covariant_derivative(const Vector<T>& gam, const SmoothMap& Z, std::span<const T> X, std::span<const T> x) {
  Vector<T> z, dz;
  jet(Z, x, X, z, dz);
  Vector<T> Xv(X.begin(), X.end());
  auto c = contract(gam, Xv, z);
  for (std::size_t k = 0; k < dz.size(); ++k) dz[k] += c[k];
  return dz;
}

template <class T>
Vector<T> covariant_derivative(const ChartManifold& M, const SmoothMap& Z, std::span<const T> X,
                               std::span<const T> x) {
  return covariant_derivative(christoffel(M, x), Z, X, x);
}

inline std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }
inline Vec to_eigen(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

inline Vec derivative_part(const Vector<D1>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i].eps;
  return out;
}
inline Vec value_part(const Vector<D1>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i].val;
  return out;
}

/// The point p + εX as first-order duals.
inline Vector<D1> curve_through(const Vec& p, const Vec& X) {
  Vector<D1> out;
  for (Eigen::Index i = 0; i < p.size(); ++i) out.emplace_back(p[i], X[i]);
  return out;
}

/// f′(0) from central differences at h and h/2 combined by one Richardson step:
/// (4 D(h/2) − D(h)) / 3, which cancels the h² error term.
template <class F>
auto richardson_derivative(F&& f, double h) {
  auto D = [&](double k) { return ((f(k) - f(-k)) / (2.0 * k)).eval(); };
  return ((4.0 * D(0.5 * h) - D(h)) / 3.0).eval();
}

}  // namespace gnb::kernels
