#include "gnb/gnatural.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gnb {

ScalarFn ScalarFn::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }};
}

ScalarFn ScalarFn::polynomial(std::vector<double> coeffs) {
  auto value = [coeffs](double t) {
    double s = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) s = s * t + *it;
    return s;
  };
  auto derivative = [coeffs](double t) {
    double s = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 1;) s = s * t + static_cast<double>(k) * coeffs[k];
    return s;
  };
  return {value, derivative};
}

ScalarFn operator+(const ScalarFn& f, const ScalarFn& g) {
  return {[f, g](double t) { return f.value(t) + g.value(t); },
          [f, g](double t) { return f.derivative(t) + g.derivative(t); }};
}

ScalarFn operator-(const ScalarFn& f, const ScalarFn& g) {
  return {[f, g](double t) { return f.value(t) - g.value(t); },
          [f, g](double t) { return f.derivative(t) - g.derivative(t); }};
}

ScalarFn operator*(double c, const ScalarFn& f) {
  return {[c, f](double t) { return c * f.value(t); }, [c, f](double t) { return c * f.derivative(t); }};
}

GeneratorValues values_at(const GeneratorSet& gen, double t) {
  if (!gen.domain.contains(t))
    throw Error(ErrorCode::OutOfDomain, "t = " + std::to_string(t) + " outside the domain of " + gen.name);
  return {gen.a1(t),
          gen.a2(t),
          gen.a3(t),
          gen.b1(t),
          gen.b2(t),
          gen.b3(t),
          gen.a1.derivative(t),
          gen.a2.derivative(t),
          gen.a3.derivative(t),
          gen.b1.derivative(t),
          gen.b2.derivative(t),
          gen.b3.derivative(t)};
}

DerivedScalars derived_at(const GeneratorSet& gen, double t) {
  const GeneratorValues v = values_at(gen, t);
  DerivedScalars d{};
  d.A = v.a1 + v.a3;
  d.B = v.b1 + v.b3;
  d.dA = v.da1 + v.da3;
  d.dB = v.db1 + v.db3;
  d.F1 = v.a1 + t * v.b1;
  d.F2 = v.a2 + t * v.b2;
  d.F3 = v.a3 + t * v.b3;
  d.a = v.a1 * d.A - v.a2 * v.a2;
  d.F = d.F1 * (d.F1 + d.F3) - d.F2 * d.F2;
  return d;
}

NondegeneracyReport check_nondegenerate(const GeneratorSet& gen, double t_max, int n_samples, bool dim1,
                                        double threshold) {
  if (!(t_max > 0.0)) throw Error(ErrorCode::OutOfDomain, "t_max must be positive");
  NondegeneracyReport rep;
  const double lo = std::max(0.0, gen.domain.lower);
  const double hi = std::min(t_max, gen.domain.upper);
  const int count = std::max(n_samples, 2);
  for (int k = 0; k < count; ++k) {
    // Open lower ends are approached from the right but never touched.
    const double t = gen.domain.lower_open ? lo + (hi - lo) * static_cast<double>(k + 1) / count
                                           : lo + (hi - lo) * static_cast<double>(k) / (count - 1);
    if (!gen.domain.contains(t)) continue;
    const DerivedScalars d = derived_at(gen, t);
    ++rep.samples;
    rep.min_abs_a = std::min(rep.min_abs_a, std::abs(d.a));
    rep.a_min = std::min(rep.a_min, d.a);
    rep.a_max = std::max(rep.a_max, d.a);
    rep.F_min = std::min(rep.F_min, d.F);
    rep.F_max = std::max(rep.F_max, d.F);
    rep.min_abs_F = std::min(rep.min_abs_F, std::abs(d.F));
    const bool bad = !(std::abs(d.a) > threshold) || (!dim1 && !(std::abs(d.F) > threshold));
    if (bad) {
      rep.pass = false;
      rep.failing_t.push_back(t);
    }
  }
  return rep;
}

GeneratorSet preset(Preset p) {
  switch (p) {
    case Preset::sasaki:
      return {"sasaki",
              ScalarFn::constant(1.0),
              ScalarFn::constant(0.0),
              ScalarFn::constant(0.0),
              ScalarFn::constant(0.0),
              ScalarFn::constant(0.0),
              ScalarFn::constant(0.0),
              {}};
    case Preset::cheeger_gromoll: {
      ScalarFn inv{[](double t) { return 1.0 / (1.0 + t); }, [](double t) { return -1.0 / ((1.0 + t) * (1.0 + t)); }};
      ScalarFn rest = ScalarFn::constant(1.0) - inv;
      return {"cheeger_gromoll", inv, ScalarFn::constant(0.0), rest, inv, ScalarFn::constant(0.0), rest, {}};
    }
  }
  throw Error(ErrorCode::UnknownPreset, "unknown preset");
}

GeneratorSet preset(std::string_view name) {
  if (name == "sasaki") return preset(Preset::sasaki);
  if (name == "cheeger_gromoll") return preset(Preset::cheeger_gromoll);
  throw Error(ErrorCode::UnknownPreset, "unknown metric preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"sasaki", "cheeger_gromoll"}; }

GeneratorSet construct_concircular_family(double alpha, const ScalarFn& a1, double C, std::optional<double> flat_c1,
                                          double t_check) {
  const double c1 = flat_c1.value_or(0.0);
  if (!flat_c1 && C == 0.0) throw Error(ErrorCode::DegenerateConstruction, "the constant C must be non-zero");
  GeneratorSet gen;
  gen.name = flat_c1 ? "concircular_family_flat" : "concircular_family";
  gen.a1 = a1;
  gen.a2 = ScalarFn::constant(c1) - alpha * a1;
  // a3 = A − a1 with A = α² a1 + C1 α + C
  gen.a3 = (alpha * alpha - 1.0) * a1 + ScalarFn::constant(c1 * alpha + C);
  gen.b1 = gen.b2 = gen.b3 = ScalarFn::constant(0.0);

  const int n = 1000;
  if (flat_c1) {
    for (int k = 0; k <= n; ++k) {
      const double t = t_check * k / n;
      if (std::abs(C * a1(t) + c1) <= kNondegeneracyThreshold)
        throw Error(ErrorCode::DegenerateConstruction, "C a1 + C1 vanishes at t = " + std::to_string(t));
    }
  }
  const auto rep = check_nondegenerate(gen, t_check, n + 1);
  if (!rep.pass)
    throw Error(ErrorCode::DegenerateConstruction,
                "constructed family is degenerate at t = " + std::to_string(rep.failing_t.front()));
  return gen;
}

GeneratorSet construct_recurrent_example(double K, const ScalarFn& a1, double eps, double A_const) {
  if (K == 0.0) throw Error(ErrorCode::DegenerateConstruction, "K must be non-zero");
  if (A_const == 0.0) throw Error(ErrorCode::DegenerateConstruction, "A must be a non-zero constant");
  if (!(eps > 0.0)) throw Error(ErrorCode::OutOfDomain, "eps must be positive");
  GeneratorSet gen;
  gen.name = "recurrent_example";
  gen.domain = TDomain{eps, true};
  gen.a1 = a1;
  gen.a2 = ScalarFn::constant(0.0);
  gen.a3 = ScalarFn::constant(A_const) - a1;
  // b1 = (K/t − a1)/t so that F1 = a1 + t b1 = K/t.
  gen.b1 = ScalarFn{[K, a1](double t) { return (K / t - a1(t)) / t; },
                    [K, a1](double t) { return -2.0 * K / (t * t * t) + a1(t) / (t * t) - a1.derivative(t) / t; }};
  gen.b2 = ScalarFn::constant(0.0);
  gen.b3 = -1.0 * gen.b1;
  return gen;
}

GeneratorSet random_polynomial_family(std::uint64_t seed, int degree, double t_max) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  // Leading constants keep a1 and A away from zero; higher coefficients are
  // damped by t_max so the t-dependence stays O(1) on the checked range.
  auto poly = [&](double c0, double spread) {
    std::vector<double> c{c0 + spread * unit(rng)};
    for (int k = 1; k <= degree; ++k) c.push_back(spread * unit(rng) / std::pow(t_max, k));
    return ScalarFn::polynomial(c);
  };
  for (int attempt = 0; attempt < 1000; ++attempt) {
    GeneratorSet gen;
    gen.name = "random_polynomial_" + std::to_string(seed);
    gen.a1 = poly(1.0, 0.3);
    gen.a2 = poly(0.0, 0.2);
    gen.a3 = poly(0.5, 0.3);
    gen.b1 = poly(0.0, 0.1);
    gen.b2 = poly(0.0, 0.05);
    gen.b3 = poly(0.0, 0.1);
    if (check_nondegenerate(gen, t_max, 1001, false, 1e-3).pass) return gen;
  }
  throw Error(ErrorCode::DegenerateConstruction, "no non-degenerate polynomial family found");
}

double recurrent_example_residual(const GeneratorSet& gen, double t) {
  const GeneratorValues v = values_at(gen, t);
  return v.a1 + t * v.da1 + t * (2.0 * v.b1 + t * v.db1);
}

}  // namespace gnb
