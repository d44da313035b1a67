#pragma once

// Generator functions a1, a2, a3, b1, b2, b3 of t = g(u,u) that determine a
// g-natural metric on TM, plus the derived scalars used throughout:
//   A = a1 + a3, B = b1 + b3, F_j = a_j + t b_j,
//   a = a1 A − a2², F = F1 (F1 + F3) − F2².
// Every generator carries an analytic first derivative.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gnb/dual.hpp"
#include "gnb/error.hpp"

namespace gnb {

struct ScalarFn {
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  double operator()(double t) const { return value(t); }

  static ScalarFn constant(double c);
  /// c0 + c1 t + c2 t² + ...
  static ScalarFn polynomial(std::vector<double> coeffs);

  friend ScalarFn operator+(const ScalarFn& f, const ScalarFn& g);
  friend ScalarFn operator-(const ScalarFn& f, const ScalarFn& g);
  friend ScalarFn operator*(double c, const ScalarFn& f);
};

/// Evaluate on t or on a first-order dual t (chain rule through the analytic
/// derivative). Second-order duals would need f'' and are rejected.
template <class T>
T eval(const ScalarFn& f, const T& t) {
  if constexpr (std::is_same_v<T, double>) {
    return f.value(t);
  } else if constexpr (std::is_same_v<T, D1>) {
    return D1(f.value(t.val), f.derivative(t.val) * t.eps);
  } else {
    throw Error(ErrorCode::Unsupported, "generator functions carry first derivatives only");
  }
}

/// Interval of admissible t. The lower end may be open for families that are
/// singular on the zero section.
struct TDomain {
  double lower = 0.0;
  bool lower_open = false;
  double upper = std::numeric_limits<double>::infinity();

  bool contains(double t) const { return (lower_open ? t > lower : t >= lower) && t <= upper; }
};

struct GeneratorSet {
  std::string name;
  ScalarFn a1, a2, a3, b1, b2, b3;
  TDomain domain;
};

/// Generator values and first derivatives at one t.
struct GeneratorValues {
  double a1, a2, a3, b1, b2, b3;
  double da1, da2, da3, db1, db2, db3;
};

GeneratorValues values_at(const GeneratorSet& gen, double t);

struct DerivedScalars {
  double A, B;    // a1 + a3, b1 + b3
  double dA, dB;  // A′, B′
  double F1, F2, F3;
  double a;  // a1 A − a2²
  double F;  // F1 (F1 + F3) − F2²
};

DerivedScalars derived_at(const GeneratorSet& gen, double t);

inline constexpr double kNondegeneracyThreshold = 1e-10;

struct NondegeneracyReport {
  bool pass = true;
  std::vector<double> failing_t;
  double min_abs_a = std::numeric_limits<double>::infinity();
  double min_abs_F = std::numeric_limits<double>::infinity();
  double a_min = std::numeric_limits<double>::infinity();
  double a_max = -std::numeric_limits<double>::infinity();
  double F_min = std::numeric_limits<double>::infinity();
  double F_max = -std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
};

/// Samples t over [0, t_max] ∩ domain. In dimension one only a(t) is tested.
NondegeneracyReport check_nondegenerate(const GeneratorSet& gen, double t_max, int n_samples, bool dim1 = false,
                                        double threshold = kNondegeneracyThreshold);

enum class Preset { sasaki, cheeger_gromoll };

GeneratorSet preset(Preset p);
GeneratorSet preset(std::string_view name);
std::vector<std::string> preset_names();

/// a2 = −α a1, A = α² a1 + C, b_j = 0; with `flat_c1`:
/// a2 = −α a1 + C1, A = α² a1 + C1 α + C. Checked non-degenerate on [0, t_check].
GeneratorSet construct_concircular_family(double alpha, const ScalarFn& a1, double C,
                                          std::optional<double> flat_c1 = std::nullopt, double t_check = 10.0);

/// F1 = K/t, A = A_const, B = 0, a2 = b2 = 0 on t ∈ (eps, ∞); the identity
/// a1 + t a1′ + t(2 b1 + t b1′) = 0 holds there.
GeneratorSet construct_recurrent_example(double K, const ScalarFn& a1, double eps, double A_const = 1.0);

/// Polynomial generators of the given degree with seeded random coefficients,
/// redrawn until check_nondegenerate passes on [0, t_max].
GeneratorSet random_polynomial_family(std::uint64_t seed, int degree = 2, double t_max = 10.0);

/// a1 + t a1′ + t(2 b1 + t b1′)
double recurrent_example_residual(const GeneratorSet& gen, double t);

}  // namespace gnb
