#pragma once

// Forward-mode dual numbers. Nesting Dual<Dual<double>> gives mixed second
// derivatives: seed the outer eps along one direction and the inner eps along
// another, then read x.eps.eps.

#include <cmath>
#include <type_traits>

namespace gnb {

template <class T>
struct Dual {
  T val{};
  T eps{};

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v), eps(0.0) {}  // NOLINT: implicit by design of the scalar tower
  constexpr Dual(T v, T e) : val(v), eps(e) {}

  Dual& operator+=(const Dual& o) { val += o.val; eps += o.eps; return *this; }
  Dual& operator-=(const Dual& o) { val -= o.val; eps -= o.eps; return *this; }
  Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
  Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }
};

using D1 = Dual<double>;
using D2 = Dual<D1>;

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};
template <class T> inline constexpr bool is_dual_v = is_dual<T>::value;

/// Order of the scalar tower: double -> 0, D1 -> 1, D2 -> 2.
template <class T> struct dual_depth : std::integral_constant<int, 0> {};
template <class T> struct dual_depth<Dual<T>> : std::integral_constant<int, 1 + dual_depth<T>::value> {};

inline double value_of(double x) { return x; }
template <class T> double value_of(const Dual<T>& x) { return value_of(x.val); }

/// Seed a variable: value v, tangent e.
template <class T> Dual<T> make_dual(const T& v, const T& e) { return Dual<T>(v, e); }

template <class T> Dual<T> operator+(const Dual<T>& a) { return a; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.val, -a.eps}; }

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.val + b.val, a.eps + b.eps}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.val - b.val, a.eps - b.eps}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.val * b.val, a.val * b.eps + a.eps * b.val};
}
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T inv = 1.0 / b.val;
  return {a.val * inv, (a.eps * b.val - a.val * b.eps) * inv * inv};
}

template <class T> Dual<T> operator+(const Dual<T>& a, double b) { return {a.val + b, a.eps}; }
template <class T> Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.val, b.eps}; }
template <class T> Dual<T> operator-(const Dual<T>& a, double b) { return {a.val - b, a.eps}; }
template <class T> Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.val, -b.eps}; }
template <class T> Dual<T> operator*(const Dual<T>& a, double b) { return {a.val * b, a.eps * b}; }
template <class T> Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.val, a * b.eps}; }
template <class T> Dual<T> operator/(const Dual<T>& a, double b) { return {a.val / b, a.eps / b}; }
template <class T> Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

template <class T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return value_of(a) < value_of(b); }
template <class T> bool operator>(const Dual<T>& a, const Dual<T>& b) { return value_of(a) > value_of(b); }
template <class T> bool operator<(const Dual<T>& a, double b) { return value_of(a) < b; }
template <class T> bool operator>(const Dual<T>& a, double b) { return value_of(a) > b; }

template <class T> Dual<T> sin(const Dual<T>& a) {
  using std::cos, std::sin;
  return {sin(a.val), a.eps * cos(a.val)};
}
template <class T> Dual<T> cos(const Dual<T>& a) {
  using std::cos, std::sin;
  return {cos(a.val), -a.eps * sin(a.val)};
}
template <class T> Dual<T> tan(const Dual<T>& a) {
  using std::cos, std::tan;
  T c = cos(a.val);
  return {tan(a.val), a.eps / (c * c)};
}
template <class T> Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  T e = exp(a.val);
  return {e, a.eps * e};
}
template <class T> Dual<T> log(const Dual<T>& a) {
  using std::log;
  return {log(a.val), a.eps / a.val};
}
template <class T> Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  T s = sqrt(a.val);
  return {s, a.eps / (2.0 * s)};
}
template <class T> Dual<T> pow(const Dual<T>& a, double p) {
  using std::pow;
  return {pow(a.val, p), p * pow(a.val, p - 1.0) * a.eps};
}
template <class T> Dual<T> pow(const Dual<T>& a, const Dual<T>& p) {
  return exp(p * log(a));
}
template <class T> Dual<T> pow(double a, const Dual<T>& p) {
  using std::log;
  return exp(p * log(a));
}

}  // namespace gnb
