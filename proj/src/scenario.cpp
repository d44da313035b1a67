#include "gnb/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gnb/expr.hpp"
#include "gnb/submanifold.hpp"
#include "presets_data.hpp"

namespace gnb {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

void require_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) parse_fail(where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) parse_fail("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) parse_fail("missing key '" + key + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    parse_fail("bad value for '" + key + "' in " + where + ": " + e.what());
  }
}

template <class T>
T get_or(const Json& j, const std::string& key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

std::vector<std::string> coordinate_names(int n) {
  std::vector<std::string> v;
  for (int i = 1; i <= n; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

Expr parse_expr(const Json& j, const std::vector<std::string>& vars, const std::string& where) {
  if (j.is_number()) return Expr::number(j.get<double>());
  if (!j.is_string()) parse_fail(where + " must be a number or an expression string");
  try {
    return Expr::parse(j.get<std::string>(), vars);
  } catch (const Error& e) {
    parse_fail(where + ": " + e.what());
  }
}

ScalarFn scalar_fn(const Expr& e) {
  const Expr d = e.derivative(0);
  return {[e](double t) { return e.eval(t); }, [d](double t) { return d.eval(t); }};
}

// ---------------------------------------------------------------------------
// Fields

VectorField expr_vector_field(int n, std::vector<Expr> comps) {
  return VectorField::from(n, [comps](auto x, auto y) {
    using T = typename decltype(y)::value_type;
    for (std::size_t k = 0; k < comps.size(); ++k) y[k] = comps[k].template eval<T>(x);
  });
}

ScalarField expr_scalar_field(int n, Expr e) {
  return ScalarField::from(n, [e](auto x, auto y) {
    using T = typename decltype(y)::value_type;
    y[0] = e.template eval<T>(x);
  });
}

CovectorField expr_covector_field(int n, std::vector<Expr> comps) {
  return CovectorField::from(n, [comps](auto x, auto y) {
    using T = typename decltype(y)::value_type;
    for (std::size_t k = 0; k < comps.size(); ++k) y[k] = comps[k].template eval<T>(x);
  });
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

FieldBundle torse_forming(VectorField u, int n, double alpha, Vec rho) {
  return {std::move(u), ScalarField::constant(n, alpha), CovectorField::constant(rho)};
}

FieldBundle named_field(const std::string& name, const ChartManifold& M) {
  const int n = M.dim();
  const Vec zero = Vec::Zero(n);
  if (name == "zero") return torse_forming(VectorField::constant(zero), n, 0.0, zero);
  if (name == "constant") {
    Vec c(n);
    for (int i = 0; i < n; ++i) c[i] = 0.5 - 0.2 * i;
    return torse_forming(VectorField::constant(c), n, 0.0, zero);
  }
  if (name == "axial") return torse_forming(VectorField::constant(0.8 * Vec::Unit(n, n - 1)), n, 0.0, zero);
  if (name == "position") {
    auto u = VectorField::from(n, [](auto x, auto y) {
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i];
    });
    return torse_forming(u, n, 1.0, zero);
  }
  if (name == "generic") {
    auto u = VectorField::from(n, [n](auto x, auto y) {
      using std::sin;
      for (int i = 0; i < n; ++i) {
        const auto& a = x[i];
        const auto& b = x[(i + 1) % n];
        y[i] = 0.4 + 0.3 * sin(b + 0.5 * i) + 0.2 * a * b;
      }
    });
    return {u, std::nullopt, std::nullopt};
  }
  if (name == "recurrent") {
    // u = e^{λ x¹} v with λ = 0.3: ∇u = (λ dx¹) ⊗ u on a flat chart.
    Vec v = Vec::Zero(n);
    v[0] = 0.6;
    if (n > 1) v[1] = 0.8;
    auto vs = std::vector<double>(v.data(), v.data() + n);
    auto u = VectorField::from(n, [vs](auto x, auto y) {
      using std::exp;
      const auto s = exp(0.3 * x[0]);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = vs[i] * s;
    });
    return {u, ScalarField::constant(n, 0.0), CovectorField::constant(0.3 * Vec::Unit(n, 0))};
  }
  if (name == "concircular") {
    const std::string& m = M.name();
    if (starts_with(m, "euclidean") || starts_with(m, "flat_torus")) return named_field("position", M);
    if (m == "sphere2") {
      // u = −sin θ ∂_θ = grad cos θ, α = −cos θ
      auto u = VectorField::from(2, [](auto x, auto y) {
        using std::sin;
        y[0] = -sin(x[0]);
        y[1] = 0.0 * x[0];
      });
      auto alpha = ScalarField::from(2, [](auto x, auto y) {
        using std::cos;
        y[0] = -cos(x[0]);
      });
      return {u, alpha, CovectorField::constant(Vec::Zero(2))};
    }
    if (m == "cone_over_flat_torus") {
      auto u = VectorField::from(3, [](auto x, auto y) {
        y[0] = x[0];
        y[1] = 0.0 * x[0];
        y[2] = 0.0 * x[0];
      });
      return torse_forming(u, 3, 1.0, Vec::Zero(3));
    }
    parse_fail("no standard concircular field on " + m);
  }
  parse_fail("unknown field '" + name + "'");
}

FieldFactory parse_field(const Json& j, std::string& label) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    static const std::set<std::string> known{"zero",    "constant",  "axial",      "position",
                                             "generic", "recurrent", "concircular"};
    if (!known.count(name)) parse_fail("unknown field '" + name + "'");
    label = name;
    return [name](const ChartManifold& M) { return named_field(name, M); };
  }
  require_keys(j, {"name", "components", "alpha", "rho"}, "field");
  label = get_or<std::string>(j, "name", "inline", "field");
  const Json comps = get<Json>(j, "components", "field");
  if (!comps.is_array() || comps.empty()) parse_fail("field.components must be a non-empty array");
  const int n = static_cast<int>(comps.size());
  const auto vars = coordinate_names(n);
  std::vector<Expr> u;
  for (std::size_t k = 0; k < comps.size(); ++k) u.push_back(parse_expr(comps[k], vars, "field.components"));
  std::optional<Expr> alpha;
  if (j.contains("alpha")) alpha = parse_expr(j["alpha"], vars, "field.alpha");
  std::optional<std::vector<Expr>> rho;
  if (j.contains("rho")) {
    if (!j["rho"].is_array() || j["rho"].size() != comps.size()) parse_fail("field.rho must have one entry per component");
    rho.emplace();
    for (const auto& r : j["rho"]) rho->push_back(parse_expr(r, vars, "field.rho"));
  }
  return [n, u, alpha, rho](const ChartManifold& M) {
    if (M.dim() != n)
      parse_fail("field has " + std::to_string(n) + " components but " + M.name() + " has dimension " +
                 std::to_string(M.dim()));
    FieldBundle b{expr_vector_field(n, u), std::nullopt, std::nullopt};
    if (alpha) b.alpha = expr_scalar_field(n, *alpha);
    if (rho) b.rho = expr_covector_field(n, *rho);
    return b;
  };
}

// ---------------------------------------------------------------------------
// Checks

const std::set<std::string>& sweep_checks() {
  static const std::set<std::string> s{"totally_geodesic", "oracle_equivalence", "tw_tv_ledger",
                                       "normal_frame",     "sff_symmetry",       "tw_tv_vanish"};
  return s;
}

struct Case {
  std::size_t manifold_index, metric_index;
  const ChartManifold* M;
  const GeneratorSet* gen;
  FieldBundle field;
  std::string label;
};

double rel(const Vec& a, const Vec& b) { return (a - b).norm() / (1.0 + b.norm()); }

bool is_sasaki(const GeneratorSet& gen) {
  // Sasaki up to the sampled range: a1 ≡ 1, every other generator ≡ 0.
  for (double t : {0.0, 0.5, 1.0, 3.0, 10.0}) {
    if (!gen.domain.contains(t)) continue;
    const auto v = values_at(gen, t);
    if (v.a1 != 1.0 || v.a2 != 0.0 || v.a3 != 0.0 || v.b1 != 0.0 || v.b2 != 0.0 || v.b3 != 0.0) return false;
  }
  return true;
}

class CaseRunner {
 public:
  CaseRunner(const Scenario& sc, const Case& c, Execution exec) : sc_(sc), c_(c), exec_(exec) {}

  std::pair<CheckSummary, std::vector<CheckRecord>> run(const CheckSpec& spec) {
    CheckSummary sum;
    sum.check = spec.name;
    sum.case_label = c_.label;
    sum.expect = spec.expect;
    std::vector<CheckRecord> recs;
    const auto& n = spec.name;
    if (n == "nondegenerate") {
      recs = nondegenerate(sum);
    } else if (n == "recurrent_family_ode") {
      recs = recurrent_family_ode(sum);
    } else if (n == "classify") {
      recs = classify(spec, sum);
    } else if (sweep_checks().count(n)) {
      recs = sweep(n, sum);
    } else {
      recs = pointwise(n, sum);
    }
    sum.samples = recs.size();
    for (const auto& r : recs) {
      if (!r.error.empty()) ++sum.failed_samples;
      if (std::isfinite(r.residual)) sum.max_residual = std::max(sum.max_residual, r.residual);
    }
    sum.pass = sum.failed_samples == 0 && sum.outcome == sum.expect;
    return {sum, recs};
  }

 private:
  const std::vector<Vec>& points() {
    if (!points_) points_ = sample_graph_points(*c_.M, *c_.gen, c_.field.u, sc_.sampling, sc_.t_min, sc_.t_max);
    return *points_;
  }

  CheckRecord base_record(const std::string& check, std::size_t i, const Vec& p) const {
    CheckRecord r;
    r.check = check;
    r.case_label = c_.label;
    r.sample = i;
    r.point = p;
    return r;
  }

  static void all_pass(CheckSummary& sum, const std::vector<CheckRecord>& recs, const char* yes, const char* no) {
    sum.outcome = !recs.empty() && std::all_of(recs.begin(), recs.end(), [](const auto& r) { return r.pass; });
    sum.statement = sum.outcome ? yes : no;
  }

  std::vector<CheckRecord> nondegenerate(CheckSummary& sum) {
    const auto rep = check_nondegenerate(*c_.gen, sc_.t_max, 1001, c_.M->dim() == 1);
    CheckRecord r;
    r.check = "nondegenerate";
    r.case_label = c_.label;
    r.values = {{"a_min", rep.a_min},         {"a_max", rep.a_max},         {"F_min", rep.F_min},
                {"F_max", rep.F_max},         {"min_abs_a", rep.min_abs_a}, {"min_abs_F", rep.min_abs_F},
                {"t_samples", static_cast<double>(rep.samples)}};
    if (!rep.failing_t.empty()) r.values.emplace_back("first_failing_t", rep.failing_t.front());
    r.pass = rep.pass;
    sum.outcome = rep.pass;
    sum.statement = rep.pass ? "non-degenerate" : "degenerate";
    return {r};
  }

  std::vector<CheckRecord> recurrent_family_ode(CheckSummary& sum) {
    std::vector<CheckRecord> recs;
    const int count = 101;
    for (int k = 0; k < count; ++k) {
      const double t = sc_.t_min + (sc_.t_max - sc_.t_min) * k / (count - 1);
      if (!c_.gen->domain.contains(t)) continue;
      CheckRecord r;
      r.check = "recurrent_family_ode";
      r.case_label = c_.label;
      r.sample = recs.size();
      r.residual = std::abs(recurrent_example_residual(*c_.gen, t));
      r.values = {{"t", t}};
      r.pass = r.residual <= sc_.tol.ode;
      recs.push_back(std::move(r));
    }
    all_pass(sum, recs, "ODE satisfied", "ODE violated");
    return recs;
  }

  std::vector<CheckRecord> classify(const CheckSpec& spec, CheckSummary& sum) {
    const auto& pts = points();
    std::vector<CheckRecord> recs;
    try {
      const Classification cls = classify_field(*c_.M, c_.field.u, pts);
      for (std::size_t i = 0; i < cls.points.size(); ++i) {
        auto r = base_record("classify", i, cls.points[i].x);
        r.values = {{"alpha", cls.points[i].alpha}};
        for (Eigen::Index k = 0; k < cls.points[i].rho.size(); ++k)
          r.values.emplace_back("rho" + std::to_string(k + 1), cls.points[i].rho[k]);
        r.values.emplace_back("ambiguous", cls.points[i].ambiguous ? 1.0 : 0.0);
        r.residual = cls.points[i].residual;
        recs.push_back(std::move(r));
      }
      const std::string kind(to_string(cls.kind));
      sum.outcome = spec.kind.empty() || kind == spec.kind;
      sum.statement = "classified as " + kind + (cls.ambiguous ? " (ambiguous samples present)" : "");
    } catch (const std::exception& e) {
      CheckRecord r;
      r.check = "classify";
      r.case_label = c_.label;
      r.error = e.what();
      r.pass = false;
      recs.push_back(r);
      sum.statement = "classification failed";
    }
    return recs;
  }

  const VerificationReport& verification() {
    if (!report_) {
      VerificationTolerances tol{sc_.tol.sff, sc_.tol.oracle, sc_.tol.ledger, sc_.tol.orthogonality};
      report_ = totally_geodesic_test(*c_.M, *c_.gen, c_.field.u, points(), tol, exec_);
    }
    return *report_;
  }

  std::vector<CheckRecord> sweep(const std::string& check, CheckSummary& sum) {
    const auto& rep = verification();
    std::vector<CheckRecord> recs;
    for (const auto& s : rep.records) {
      auto r = base_record(check, s.index, s.p);
      r.error = s.error;
      r.values = {{"t", s.t}};
      if (check == "totally_geodesic") {
        r.values.insert(r.values.end(), {{"sff_norm", s.sff_norm}, {"tw_norm", s.tw_norm}, {"tv_norm", s.tv_norm}});
        r.residual = s.sff_norm;
        r.pass = s.sff_norm < sc_.tol.sff;
      } else if (check == "oracle_equivalence") {
        r.residual = s.closed_form_residual;
        r.pass = s.closed_form_residual <= sc_.tol.oracle;
      } else if (check == "tw_tv_ledger") {
        r.residual = s.ledger_residual;
        r.pass = s.ledger_residual <= sc_.tol.ledger;
      } else if (check == "normal_frame") {
        r.residual = s.orthogonality;
        r.pass = s.orthogonality <= sc_.tol.orthogonality;
      } else if (check == "sff_symmetry") {
        r.residual = s.sff_symmetry;
        r.pass = s.sff_symmetry <= sc_.tol.oracle;
      } else {  // tw_tv_vanish
        r.values.insert(r.values.end(), {{"tw_norm", s.tw_norm}, {"tv_norm", s.tv_norm}});
        r.residual = std::max(s.tw_norm, s.tv_norm);
        r.pass = r.residual <= sc_.tol.analytic;
      }
      if (!s.error.empty()) r.pass = false;
      recs.push_back(std::move(r));
    }
    if (check == "totally_geodesic") {
      all_pass(sum, recs, "totally geodesic", "not totally geodesic");
    } else if (check == "tw_tv_vanish") {
      all_pass(sum, recs, "T_W and T_V vanish", "T_W or T_V does not vanish");
    } else {
      all_pass(sum, recs, "within tolerance", "tolerance exceeded");
    }
    return recs;
  }

  // Checks evaluated independently at each sample and each coordinate direction.
  std::vector<CheckRecord> pointwise(const std::string& check, CheckSummary& sum) {
    const auto& pts = points();
    std::vector<CheckRecord> recs(pts.size());
    for_each_index(pts.size(), exec_, [&](std::size_t i) {
      auto r = base_record(check, i, pts[i]);
      try {
        evaluate(check, pts[i], r);
      } catch (const std::exception& e) {
        r.error = e.what();
        r.pass = false;
      }
      recs[i] = std::move(r);
    });
    if (check == "constant_length_converse") {
      double peak = 0.0;
      for (const auto& r : recs)
        for (const auto& [k, v] : r.values)
          if (k == "max_value") peak = std::max(peak, v);
      const bool agree = !recs.empty() && std::all_of(recs.begin(), recs.end(), [](const auto& r) { return r.pass; });
      sum.outcome = agree && peak > sc_.tol.analytic;
      sum.statement = !agree ? "closed form disagrees with oracle"
                             : (sum.outcome ? "non-geodesy certified" : "converse scalar vanishes");
    } else {
      all_pass(sum, recs, "reduction holds", "reduction fails");
    }
    return recs;
  }

  void evaluate(const std::string& check, const Vec& p, CheckRecord& r) const {
    const ChartManifold& M = *c_.M;
    const GeneratorSet& gen = *c_.gen;
    const VectorField& u = c_.field.u;
    const int n = M.dim();
    auto need_alpha = [&]() -> const ScalarField& {
      if (!c_.field.alpha) throw Error(ErrorCode::Unsupported, check + " needs a field with alpha");
      return *c_.field.alpha;
    };
    auto need_rho = [&]() -> const CovectorField& {
      if (!c_.field.rho) throw Error(ErrorCode::Unsupported, check + " needs a field with rho");
      return *c_.field.rho;
    };
    const Mat g = M.metric_at(p);
    const Vec up = u.at(p);
    double worst = 0.0;
    double tv_max = 0.0, tw_max = 0.0;

    if (check == "constant_length_converse") {
      // Directions with g(u, ∇_X u) = 0.
      Mat row(1, n);
      for (int i = 0; i < n; ++i) row(0, i) = inner(g, up, covariant_derivative(M, u, Vec::Unit(n, i), p));
      Mat kernel;
      if (row.norm() < 1e-12) {
        kernel = Mat::Identity(n, n);
      } else {
        Eigen::JacobiSVD<Mat> svd(row, Eigen::ComputeFullV);
        kernel = svd.matrixV().rightCols(n - 1);
      }
      const bool sasaki = is_sasaki(gen);
      double peak = 0.0;
      for (Eigen::Index k = 0; k < kernel.cols(); ++k) {
        const Vec X = kernel.col(k);
        const double closed = constant_length_converse(M, gen, u, p, X);
        const double oracle = constant_length_converse_oracle(M, gen, u, p, X);
        double res = std::abs(closed - oracle) / (1.0 + std::abs(closed));
        if (sasaki) {
          const Vec Du = covariant_derivative(M, u, X, p);
          res = std::max(res, std::abs(closed - inner(g, Du, Du)) / (1.0 + std::abs(closed)));
        }
        worst = std::max(worst, res);
        peak = std::max(peak, closed);
      }
      r.values = {{"max_value", peak}, {"directions", static_cast<double>(kernel.cols())}};
      r.residual = worst;
      r.pass = worst <= sc_.tol.oracle;
      return;
    }

    if (check == "torse_forming_normality") {
      const ScalarField alpha = c_.field.alpha ? *c_.field.alpha : ScalarField::constant(n, 0.0);
      const CovectorField rho = c_.field.rho ? *c_.field.rho : CovectorField::constant(Vec::Zero(n));
      const auto frame = graph_frame(M, gen, u, p);
      const double scale = 1.0 + frame.G.cwiseAbs().maxCoeff();
      for (const auto& eta : frame.normal_basis)
        worst = std::max(worst, torse_forming_normality_residual(M, gen, u, rho, alpha, p, eta.hor, eta.ver) / scale);
      r.residual = worst;
      r.pass = worst <= sc_.tol.orthogonality;
      return;
    }

    const auto R = riemann_at(M, p);
    for (int i = 0; i < n; ++i) {
      const Vec X = Vec::Unit(n, i);
      const VectorField Xg = geodesic_extension(M, p, X);
      const TwTv general = tw_tv_general(M, gen, u, p, Xg);
      tw_max = std::max(tw_max, general.tw.norm());
      tv_max = std::max(tv_max, general.tv.norm());
      if (check == "concircular_reduction") {
        const TwTv special = tw_tv_concircular(M, gen, u, need_alpha(), p, Xg);
        worst = std::max({worst, rel(special.tw, general.tw), rel(special.tv, general.tv)});
      } else if (check == "recurrent_reduction") {
        const TwTv special = tw_tv_recurrent(M, gen, u, need_rho(), p, Xg);
        worst = std::max({worst, rel(special.tw, general.tw), rel(special.tv, general.tv)});
      } else if (check == "sasaki_concircular_reduction") {
        const ScalarField& alpha = need_alpha();
        const Vec tw = alpha.at(p) * R.apply(up, X, X);
        const Vec tv = directional_derivative(alpha, X, p) * X;
        worst = std::max({worst, rel(general.tw, tw), rel(general.tv, tv)});
      } else if (check == "sasaki_recurrent_reduction") {
        const CovectorField& rho = need_rho();
        const double rX = rho.at(p).dot(X);
        const Vec tv = (covariant_derivative_form(M, rho, X, X, p) + rX * rX) * up;
        const Vec second = second_covariant(M, u, Xg, p);
        worst = std::max({worst, general.tw.norm(), rel(general.tv, tv), rel(general.tv, second)});
      } else {
        throw Error(ErrorCode::UnknownCheck, check);
      }
    }
    r.values = {{"tw_norm", tw_max}, {"tv_norm", tv_max}};
    r.residual = worst;
    r.pass = worst <= sc_.tol.analytic;
  }

  const Scenario& sc_;
  const Case& c_;
  Execution exec_;
  std::optional<std::vector<Vec>> points_;
  std::optional<VerificationReport> report_;
};

// ---------------------------------------------------------------------------
// JSON output

void emit(const Json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(k).dump() + ": ";
        emit(v, out, indent, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        emit(v, out, indent, depth + 1);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"nondegenerate",
                                              "totally_geodesic",
                                              "oracle_equivalence",
                                              "tw_tv_ledger",
                                              "normal_frame",
                                              "sff_symmetry",
                                              "tw_tv_vanish",
                                              "concircular_reduction",
                                              "sasaki_concircular_reduction",
                                              "recurrent_reduction",
                                              "sasaki_recurrent_reduction",
                                              "constant_length_converse",
                                              "torse_forming_normality",
                                              "classify",
                                              "recurrent_family_ode"};
  return names;
}

GeneratorSet parse_metric(const Json& j) {
  if (j.is_string()) return preset(j.get<std::string>());
  if (!j.is_object()) parse_fail("metric must be a preset name or an object");
  const std::vector<std::string> tvar{"t"};
  if (j.contains("family")) {
    const auto family = get<std::string>(j, "family", "metric");
    if (family == "concircular") {
      require_keys(j, {"family", "alpha", "a1", "C", "C1", "t_check"}, "concircular family");
      std::optional<double> c1;
      if (j.contains("C1")) c1 = get<double>(j, "C1", "concircular family");
      return construct_concircular_family(get<double>(j, "alpha", "concircular family"),
                                          scalar_fn(parse_expr(j.at("a1"), tvar, "concircular family a1")),
                                          get<double>(j, "C", "concircular family"), c1,
                                          get_or<double>(j, "t_check", 10.0, "concircular family"));
    }
    if (family == "recurrent_example") {
      require_keys(j, {"family", "K", "a1", "eps", "A"}, "recurrent_example family");
      return construct_recurrent_example(get<double>(j, "K", "recurrent_example family"),
                                         scalar_fn(parse_expr(j.at("a1"), tvar, "recurrent_example a1")),
                                         get<double>(j, "eps", "recurrent_example family"),
                                         get_or<double>(j, "A", 1.0, "recurrent_example family"));
    }
    if (family == "random_polynomial") {
      require_keys(j, {"family", "seed", "degree", "t_max"}, "random_polynomial family");
      return random_polynomial_family(get<std::uint64_t>(j, "seed", "random_polynomial family"),
                                      get_or<int>(j, "degree", 2, "random_polynomial family"),
                                      get_or<double>(j, "t_max", 10.0, "random_polynomial family"));
    }
    parse_fail("unknown metric family '" + family + "'");
  }
  require_keys(j, {"name", "a1", "a2", "a3", "b1", "b2", "b3", "domain"}, "metric");
  GeneratorSet gen;
  gen.name = get_or<std::string>(j, "name", "custom", "metric");
  ScalarFn* slots[] = {&gen.a1, &gen.a2, &gen.a3, &gen.b1, &gen.b2, &gen.b3};
  const char* keys[] = {"a1", "a2", "a3", "b1", "b2", "b3"};
  for (int k = 0; k < 6; ++k)
    *slots[k] = j.contains(keys[k]) ? scalar_fn(parse_expr(j.at(keys[k]), tvar, std::string("metric.") + keys[k]))
                                    : ScalarFn::constant(0.0);
  if (j.contains("domain")) {
    const Json& d = j.at("domain");
    require_keys(d, {"lower", "lower_open", "upper"}, "metric.domain");
    gen.domain.lower = get_or<double>(d, "lower", 0.0, "metric.domain");
    gen.domain.lower_open = get_or<bool>(d, "lower_open", false, "metric.domain");
    gen.domain.upper = get_or<double>(d, "upper", std::numeric_limits<double>::infinity(), "metric.domain");
  }
  return gen;
}

ChartManifold parse_manifold(const Json& j) {
  if (j.is_string()) {
    try {
      return manifolds::by_name(j.get<std::string>());
    } catch (const Error& e) {
      parse_fail(e.what());
    }
  }
  require_keys(j, {"name", "dim", "metric", "box"}, "manifold");
  const int n = get<int>(j, "dim", "manifold");
  if (n < 1) parse_fail("manifold.dim must be positive");
  const auto vars = coordinate_names(n);
  if (!j.contains("metric")) parse_fail("missing key 'metric' in manifold");
  const Json& m = j.at("metric");
  if (!m.is_array() || static_cast<int>(m.size()) != n) parse_fail("manifold.metric must be an n × n array");
  std::vector<Expr> comps;
  for (const auto& row : m) {
    if (!row.is_array() || static_cast<int>(row.size()) != n) parse_fail("manifold.metric must be an n × n array");
    for (const auto& e : row) comps.push_back(parse_expr(e, vars, "manifold.metric"));
  }
  Box box{Vec::Constant(n, -1.0), Vec::Constant(n, 1.0)};
  if (j.contains("box")) {
    const Json& b = j.at("box");
    require_keys(b, {"lower", "upper"}, "manifold.box");
    const auto lo = get<std::vector<double>>(b, "lower", "manifold.box");
    const auto hi = get<std::vector<double>>(b, "upper", "manifold.box");
    if (static_cast<int>(lo.size()) != n || static_cast<int>(hi.size()) != n)
      parse_fail("manifold.box bounds must have dim entries");
    box = {Eigen::Map<const Vec>(lo.data(), n), Eigen::Map<const Vec>(hi.data(), n)};
  }
  SmoothMap metric(n, n * n, [comps](auto x, auto y) {
    using T = typename decltype(y)::value_type;
    for (std::size_t k = 0; k < comps.size(); ++k) y[k] = comps[k].template eval<T>(x);
  });
  // The chart is wherever the metric is finite and positive definite.
  auto domain = [metric, n](const Vec& x) {
    std::vector<double> xs(x.data(), x.data() + n);
    const auto g = metric(xs);
    Mat G(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) G(a, b) = g[a <= b ? a * n + b : b * n + a];
    if (!G.allFinite()) return false;
    return Eigen::LLT<Mat>(G).info() == Eigen::Success;
  };
  return ChartManifold(get_or<std::string>(j, "name", "inline" + std::to_string(n), "manifold"), n, metric, domain,
                       box);
}

Scenario parse_scenario(const Json& j) {
  require_keys(j, {"manifold", "field", "metric", "sampling", "checks", "tolerances"}, "scenario");
  Scenario sc;
  sc.input = j;
  for (const char* key : {"manifold", "field", "metric", "checks"})
    if (!j.contains(key)) parse_fail(std::string("missing key '") + key + "' in scenario");

  const Json& mj = j.at("manifold");
  if (mj.is_array()) {
    for (const auto& e : mj) sc.manifolds.push_back(parse_manifold(e));
  } else {
    sc.manifolds.push_back(parse_manifold(mj));
  }
  const Json& gj = j.at("metric");
  if (gj.is_array()) {
    for (const auto& e : gj) sc.metrics.push_back(parse_metric(e));
  } else {
    sc.metrics.push_back(parse_metric(gj));
  }
  if (sc.manifolds.empty() || sc.metrics.empty()) parse_fail("manifold and metric lists must be non-empty");
  sc.field = parse_field(j.at("field"), sc.field_label);
  for (const auto& M : sc.manifolds) sc.field(M);  // dimension mismatches surface here

  if (j.contains("sampling")) {
    const Json& s = j.at("sampling");
    require_keys(s, {"n_points", "seed", "t_range", "boundary_margin"}, "sampling");
    sc.sampling.n_points = get_or<std::size_t>(s, "n_points", sc.sampling.n_points, "sampling");
    sc.sampling.seed = get_or<std::uint64_t>(s, "seed", sc.sampling.seed, "sampling");
    sc.sampling.boundary_margin = get_or<double>(s, "boundary_margin", sc.sampling.boundary_margin, "sampling");
    if (s.contains("t_range")) {
      const auto tr = get<std::vector<double>>(s, "t_range", "sampling");
      if (tr.size() != 2 || !(tr[0] < tr[1]) || tr[0] < 0.0) parse_fail("sampling.t_range must be [t_min, t_max]");
      sc.t_min = tr[0];
      sc.t_max = tr[1];
    }
  }
  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    require_keys(t, {"sff", "oracle", "ledger", "orthogonality", "analytic", "ode"}, "tolerances");
    sc.tol.sff = get_or<double>(t, "sff", sc.tol.sff, "tolerances");
    sc.tol.oracle = get_or<double>(t, "oracle", sc.tol.oracle, "tolerances");
    sc.tol.ledger = get_or<double>(t, "ledger", sc.tol.ledger, "tolerances");
    sc.tol.orthogonality = get_or<double>(t, "orthogonality", sc.tol.orthogonality, "tolerances");
    sc.tol.analytic = get_or<double>(t, "analytic", sc.tol.analytic, "tolerances");
    sc.tol.ode = get_or<double>(t, "ode", sc.tol.ode, "tolerances");
  }

  const Json& cj = j.at("checks");
  if (!cj.is_array() || cj.empty()) parse_fail("checks must be a non-empty array");
  const auto& known = check_names();
  for (const auto& c : cj) {
    CheckSpec spec;
    if (c.is_string()) {
      spec.name = c.get<std::string>();
    } else {
      require_keys(c, {"check", "expect", "kind", "manifold", "metric"}, "check");
      spec.name = get<std::string>(c, "check", "check");
      spec.expect = get_or<bool>(c, "expect", true, "check");
      spec.kind = get_or<std::string>(c, "kind", "", "check");
      if (c.contains("manifold")) spec.manifold = get<int>(c, "manifold", "check");
      if (c.contains("metric")) spec.metric = get<int>(c, "metric", "check");
    }
    if (std::find(known.begin(), known.end(), spec.name) == known.end())
      throw Error(ErrorCode::UnknownCheck, "unknown check '" + spec.name + "'");
    if (spec.manifold && (*spec.manifold < 0 || *spec.manifold >= static_cast<int>(sc.manifolds.size())))
      parse_fail("check '" + spec.name + "' refers to a missing manifold index");
    if (spec.metric && (*spec.metric < 0 || *spec.metric >= static_cast<int>(sc.metrics.size())))
      parse_fail("check '" + spec.name + "' refers to a missing metric index");
    sc.checks.push_back(spec);
  }
  return sc;
}

GeneratorSet load_metric_spec(const std::string& spec) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) return preset(spec);
  std::string text = spec;
  if (std::filesystem::is_regular_file(spec)) {
    std::ifstream in(spec);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    if (text.find_first_of("{[\"") == std::string::npos)
      throw Error(ErrorCode::UnknownPreset, "unknown metric '" + spec + "'");
    parse_fail("malformed metric JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return parse_metric(j);
}

Json check_metric_report(const GeneratorSet& gen, double t_max, int samples) {
  const auto rep = check_nondegenerate(gen, t_max, samples);
  Json j;
  j["metric"] = gen.name;
  j["t_max"] = t_max;
  j["pass"] = rep.pass;
  j["samples"] = rep.samples;
  j["a_min"] = rep.a_min;
  j["a_max"] = rep.a_max;
  j["F_min"] = rep.F_min;
  j["F_max"] = rep.F_max;
  j["min_abs_a"] = rep.min_abs_a;
  j["min_abs_F"] = rep.min_abs_F;
  j["first_failing_t"] = rep.failing_t.empty() ? Json(nullptr) : Json(rep.failing_t.front());
  return j;
}

std::vector<std::string> scenario_preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : detail::embedded_presets()) names.push_back(name);
  std::sort(names.begin(), names.end());
  return names;
}

const std::string& scenario_preset_text(const std::string& name) {
  for (const auto& [n, text] : detail::embedded_presets())
    if (n == name) return text;
  throw Error(ErrorCode::UnknownPreset, "unknown scenario preset '" + name + "'");
}

Scenario load_scenario(const std::string& source) {
  std::string text;
  auto is_file = [](const std::string& p) { return std::filesystem::is_regular_file(p); };
  if (starts_with(source, "preset:")) {
    text = scenario_preset_text(source.substr(7));
  } else if (!is_file(source) && !is_file(source + ".json")) {
    // A bare preset name or presets/<name> without the extension.
    text = scenario_preset_text(std::filesystem::path(source).stem().string());
  } else {
    std::ifstream in(is_file(source) ? source : source + ".json");
    if (!in) parse_fail("cannot open scenario file '" + source + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_fail("malformed JSON in " + source + " at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return parse_scenario(j);
}

RunReport run_scenario(const Scenario& sc, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();

  std::vector<Case> cases;
  for (std::size_t mi = 0; mi < sc.manifolds.size(); ++mi)
    for (std::size_t gi = 0; gi < sc.metrics.size(); ++gi)
      cases.push_back({mi, gi, &sc.manifolds[mi], &sc.metrics[gi], sc.field(sc.manifolds[mi]),
                       sc.manifolds[mi].name() + "/" + sc.metrics[gi].name});

  // Non-degeneracy is a precondition for every geometric check.
  const bool geometric = std::any_of(sc.checks.begin(), sc.checks.end(),
                                     [](const CheckSpec& c) { return c.name != "nondegenerate"; });
  if (geometric) {
    for (const auto& c : cases) {
      const auto rep = check_nondegenerate(*c.gen, sc.t_max, 1001, c.M->dim() == 1);
      if (!rep.pass)
        throw Error(ErrorCode::DegenerateMetric, c.gen->name + " is degenerate at t = " +
                                                     std::to_string(rep.failing_t.front()) + " within the t-range");
    }
  }

  RunReport out;
  for (auto& c : cases) {
    CaseRunner runner(sc, c, opts.exec);
    for (const auto& spec : sc.checks) {
      if (spec.manifold && static_cast<std::size_t>(*spec.manifold) != c.manifold_index) continue;
      if (spec.metric && static_cast<std::size_t>(*spec.metric) != c.metric_index) continue;
      auto [sum, recs] = runner.run(spec);
      out.checks.push_back(std::move(sum));
      for (auto& r : recs) out.records.push_back(std::move(r));
    }
  }
  std::stable_sort(out.records.begin(), out.records.end(), [](const CheckRecord& a, const CheckRecord& b) {
    return std::tie(a.check, a.case_label, a.sample) < std::tie(b.check, b.case_label, b.sample);
  });
  out.pass = !out.checks.empty() &&
             std::all_of(out.checks.begin(), out.checks.end(), [](const CheckSummary& s) { return s.pass; });
  // Residuals of checks expected to fail measure the violation, not an error.
  for (const auto& s : out.checks)
    if (s.expect) out.max_residual = std::max(out.max_residual, s.max_residual);

  Json scen;
  scen["source"] = opts.source;
  scen["input"] = sc.input;
  scen["field"] = sc.field_label;
  Json labels = Json::array();
  for (const auto& c : cases) labels.push_back(c.label);
  scen["cases"] = labels;
  scen["sampling"] = {{"n_points", sc.sampling.n_points},
                      {"seed", sc.sampling.seed},
                      {"boundary_margin", sc.sampling.boundary_margin},
                      {"t_range", {sc.t_min, sc.t_max}}};
  scen["tolerances"] = {{"sff", sc.tol.sff},           {"oracle", sc.tol.oracle},
                        {"ledger", sc.tol.ledger},     {"orthogonality", sc.tol.orthogonality},
                        {"analytic", sc.tol.analytic}, {"ode", sc.tol.ode}};
  out.scenario = scen;
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Json report_to_json(const RunReport& r) {
  Json checks = Json::array();
  for (const auto& s : r.checks)
    checks.push_back({{"check", s.check},
                      {"case", s.case_label},
                      {"outcome", s.outcome},
                      {"expect", s.expect},
                      {"pass", s.pass},
                      {"statement", s.statement},
                      {"max_residual", s.max_residual},
                      {"samples", s.samples},
                      {"failed_samples", s.failed_samples}});
  Json records = Json::array();
  for (const auto& rec : r.records) {
    Json o;
    o["check"] = rec.check;
    o["case"] = rec.case_label;
    o["sample"] = rec.sample;
    o["point"] = rec.point ? vec_json(*rec.point) : Json(nullptr);
    Json values = Json::object();
    for (const auto& [k, v] : rec.values) values[k] = v;
    o["values"] = values;
    o["residual"] = rec.residual;
    o["pass"] = rec.pass;
    if (!rec.error.empty()) o["error"] = rec.error;
    records.push_back(std::move(o));
  }
  Json j;
  j["schema_version"] = 1;
  j["scenario"] = r.scenario;
  j["summary"] = {{"verdict", r.pass ? "pass" : "fail"},
                  {"max_residual", r.max_residual},
                  {"checks", checks},
                  {"wall_time", r.wall_time}};
  j["records"] = records;
  return j;
}

std::string dump_json(const Json& j, int indent) {
  std::string out;
  emit(j, out, indent, 0);
  out += "\n";
  return out;
}

std::string report_body(const RunReport& r) {
  Json j = report_to_json(r);
  j["summary"].erase("wall_time");
  return dump_json(j);
}

}  // namespace gnb
