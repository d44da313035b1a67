#pragma once

// Type-erased smooth maps R^in -> R^out that can be evaluated on plain doubles
// and on first- and second-order dual numbers. A map built from a generic
// callable `f(std::span<const T> x, std::span<T> y)` supports every level; a
// map built from per-level callables may leave the second-order level empty,
// in which case evaluating it throws ErrorCode::Unsupported.

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gnb/dual.hpp"
#include "gnb/error.hpp"

namespace gnb {

class SmoothMap {
 public:
  template <class T>
  using Fn = std::function<void(std::span<const T>, std::span<T>)>;

  SmoothMap() = default;

  template <class F>
  SmoothMap(int in_dim, int out_dim, F f)
      : in_(in_dim), out_(out_dim), f0_(f), f1_(f), f2_(f) {}

  SmoothMap(int in_dim, int out_dim, Fn<double> f0, Fn<D1> f1, Fn<D2> f2)
      : in_(in_dim), out_(out_dim), f0_(std::move(f0)), f1_(std::move(f1)), f2_(std::move(f2)) {}

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }
  explicit operator bool() const { return static_cast<bool>(f0_); }

  template <class T>
  void eval(std::span<const T> x, std::span<T> y) const {
    const auto& f = level<T>();
    if (!f) throw Error(ErrorCode::Unsupported, "smooth map has no evaluation at dual depth " +
                                                    std::to_string(dual_depth<T>::value));
    f(x, y);
  }

  template <class T>
  std::vector<T> operator()(std::span<const T> x) const {
    std::vector<T> y(static_cast<std::size_t>(out_), T(0.0));
    eval<T>(x, y);
    return y;
  }

  template <class T>
  std::vector<T> operator()(const std::vector<T>& x) const {
    return (*this)(std::span<const T>(x));
  }

 private:
  template <class T>
  const Fn<T>& level() const {
    if constexpr (std::is_same_v<T, double>) return f0_;
    else if constexpr (std::is_same_v<T, D1>) return f1_;
    else {
      static_assert(std::is_same_v<T, D2>, "only double, D1 and D2 are supported");
      return f2_;
    }
  }

  int in_ = 0;
  int out_ = 0;
  Fn<double> f0_;
  Fn<D1> f1_;
  Fn<D2> f2_;
};

}  // namespace gnb
