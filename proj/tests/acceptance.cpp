// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gnb/scenario.hpp"
#include "gnb/submanifold.hpp"
#include "oracles.hpp"

using namespace gnb;
using gnb::test::vec;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double rel(const Vec& a, const Vec& b) { return (a - b).norm() / (1.0 + b.norm()); }

/// Runs a criterion body, turning exceptions into a FAIL line.
template <class F>
void criterion(int id, const std::string& what, F body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, what, std::string("error: ") + e.what());
  }
}

struct Peak {
  double value = 0.0;
  void operator()(double v) { value = std::max(value, std::isnan(v) ? INFINITY : v); }
};

const VectorField& recurrent_u3() {
  static const VectorField u = test::exponential_field(vec({0.6, 0.8, 0.0}), 0.3);
  return u;
}

}  // namespace

int main() {
  const auto sasaki = preset("sasaki");
  const SamplingConfig cfg{20, 7, 0.1};

  criterion(1, "closed form vs connection oracle sweep", [&] {
    const std::vector<ChartManifold> mans{manifolds::euclidean(2), manifolds::euclidean(3), manifolds::sphere2(),
                                          manifolds::poincare_half_plane()};
    const std::vector<GeneratorSet> gens{sasaki, preset("cheeger_gromoll"),
                                         construct_concircular_family(0.5, ScalarFn::polynomial({1.0, 0.5}), 1.0),
                                         random_polynomial_family(2024)};
    const auto start = std::chrono::steady_clock::now();
    Peak worst;
    std::size_t samples = 0, errors = 0;
    for (const auto& M : mans)
      for (const auto& gen : gens) {
        const auto u = test::wobbly_field(M.dim());
        const auto pts = sample_graph_points(M, gen, u, cfg, 0.0, 10.0);
        const auto rep = totally_geodesic_test(M, gen, u, pts, {}, Execution::serial);
        worst(rep.max_closed_form_residual);
        samples += rep.records.size();
        errors += rep.failed_samples;
      }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = worst.value <= 1e-5 && samples == 320 && errors == 0 && secs < 60.0;
    report(1, ok, "closed form vs connection oracle sweep",
           fmt("max relative residual %.2e, tol 1e-05, ", worst.value) + std::to_string(samples) + " samples, " +
               fmt("%.2f s serial, limit 60 s", secs));
  });

  criterion(2, "sasaki with a parallel field is totally geodesic", [&] {
    Peak sff;
    std::size_t errors = 0;
    const std::vector<std::pair<ChartManifold, Vec>> cases{{manifolds::flat_torus(2), vec({0.5, -0.2})},
                                                           {manifolds::euclidean(3), vec({0.8, 0.0, 0.0})}};
    for (const auto& [M, v] : cases) {
      const auto u = VectorField::constant(v);
      const auto rep = totally_geodesic_test(M, sasaki, u, sample_points(M, cfg));
      sff(rep.max_sff);
      errors += rep.failed_samples;
    }
    report(2, sff.value < 1e-7 && errors == 0, "sasaki with a parallel field is totally geodesic",
           fmt("max |II| %.2e, tol 1e-07", sff.value));
  });

  criterion(3, "constant-length converse certifies non-geodesy", [&] {
    const auto E = manifolds::euclidean(2);
    const auto u = VectorField::from(2, [](auto x, auto y) {
      using std::cos, std::sin;
      y[0] = cos(x[0]);
      y[1] = sin(x[0]);
    });
    Peak err;
    double peak = 0.0;
    for (const auto& p : sample_points(E, cfg))
      for (int i = 0; i < 2; ++i) {
        const Vec X = Vec::Unit(2, i);
        const Vec Du = covariant_derivative(E, u, X, p);
        const double v = constant_length_converse(E, sasaki, u, p, X);
        err(std::abs(v - Du.squaredNorm()));
        peak = std::max(peak, v);
      }
    report(3, err.value <= 1e-6 && peak > 0.0, "constant-length converse certifies non-geodesy",
           fmt("max |value - g(Du,Du)| %.2e, tol 1e-06, ", err.value) + fmt("max value %.3f > 0", peak));
  });

  criterion(4, "parallel field with A' = 0, B = 0 is totally geodesic", [&] {
    auto gen = [](const char* a2) {
      return parse_metric(Json{{"name", "const_A_zero_B"}, {"a1", "1 + t"}, {"a2", a2}, {"a3", "2 - (1 + t)"},
                               {"b1", "0.5"}, {"b2", "0.1"}, {"b3", "-0.5"}});
    };
    const auto curved = manifolds::sphere_times_line();
    const auto flat = manifolds::euclidean(3);
    const auto u = VectorField::constant(vec({0.0, 0.0, 0.8}));
    const auto g0 = gen("0"), g1 = gen("0.3");
    const auto a = totally_geodesic_test(curved, g0, u, sample_graph_points(curved, g0, u, cfg, 0.0, 10.0));
    const auto b = totally_geodesic_test(flat, g1, u, sample_graph_points(flat, g1, u, cfg, 0.0, 10.0));
    const bool nondeg = check_nondegenerate(g0, 10.0, 1001).pass && check_nondegenerate(g1, 10.0, 1001).pass;
    const bool ok = a.max_sff < 1e-6 && b.max_sff < 1e-6 && a.failed_samples + b.failed_samples == 0 && nondeg;
    report(4, ok, "parallel field with A' = 0, B = 0 is totally geodesic",
           fmt("curved base a2 = 0: max |II| %.2e; ", a.max_sff) + fmt("flat base a2 = 0.3: %.2e; tol 1e-06", b.max_sff));
  });

  criterion(5, "sasaki concircular reduction and verdicts", [&] {
    const auto sc = load_scenario("preset:concircular_sasaki_curved");
    const ChartManifold& S = sc.manifolds[0];
    const ChartManifold& cone = sc.manifolds[1];
    const auto E = manifolds::euclidean(3);
    Peak tv_zero, tw_res, tv_res;
    auto reduce = [&](const ChartManifold& M, const VectorField& u, const ScalarField& alpha, bool alpha_const) {
      for (const auto& p : sample_points(M, cfg)) {
        const auto R = riemann_at(M, p);
        for (int i = 0; i < M.dim(); ++i) {
          const Vec X = Vec::Unit(M.dim(), i);
          const auto t = tw_tv_general(M, sasaki, u, p, geodesic_extension(M, p, X));
          tw_res(rel(t.tw, alpha.at(p) * R.apply(u.at(p), X, X)));
          if (alpha_const) tv_zero(t.tv.norm());
          else tv_res(rel(t.tv, directional_derivative(alpha, X, p) * X));
        }
      }
    };
    const auto one = ScalarField::constant(3, 1.0);
    reduce(E, test::position_field(3), one, true);
    const auto cone_field = sc.field(cone);
    reduce(cone, cone_field.u, *cone_field.alpha, true);
    const auto sphere_field = sc.field(S);
    reduce(S, sphere_field.u, *sphere_field.alpha, false);

    const auto flat = totally_geodesic_test(E, sasaki, test::position_field(3),
                                            sample_graph_points(E, sasaki, test::position_field(3), cfg, 0.0, 10.0));
    const auto curved = totally_geodesic_test(S, sasaki, sphere_field.u, sample_points(S, cfg));
    const bool ok = tv_zero.value <= 1e-8 && tw_res.value <= 1e-6 && tv_res.value <= 1e-6 && flat.totally_geodesic &&
                    !curved.totally_geodesic && curved.failed_samples == 0;
    report(5, ok, "sasaki concircular reduction and verdicts",
           fmt("T_V %.2e (tol 1e-08) for constant alpha; ", tv_zero.value) +
               fmt("T_W vs alpha R(u,X)X %.2e (tol 1e-06); ", tw_res.value) +
               fmt("T_V vs X(alpha)X on S2 %.2e; ", tv_res.value) +
               fmt("flat max |II| %.2e geodesic; ", flat.max_sff) + fmt("S2 max |II| %.3f not geodesic", curved.max_sff));
  });

  criterion(6, "constructed concircular family on a flat base", [&] {
    const auto gen = construct_concircular_family(1.0, ScalarFn::polynomial({1.0, 1.0}), 1.0, 0.5);
    Peak sff;
    std::size_t errors = 0;
    for (int n : {2, 3}) {
      const auto M = manifolds::euclidean(n);
      const auto u = test::position_field(n);
      const auto rep = totally_geodesic_test(M, gen, u, sample_graph_points(M, gen, u, cfg, 0.0, 10.0));
      sff(rep.max_sff);
      errors += rep.failed_samples;
    }
    const bool nondeg = check_nondegenerate(gen, 10.0, 1001).pass;
    report(6, sff.value < 1e-6 && errors == 0 && nondeg, "constructed concircular family on a flat base",
           fmt("max |II| %.2e, tol 1e-06, ", sff.value) + (nondeg ? "non-degenerate on [0, 10]" : "degenerate"));
  });

  criterion(7, "sasaki recurrent reduction", [&] {
    const auto rho = CovectorField::constant(vec({0.3, 0.0, 0.0}));
    const auto E = manifolds::euclidean(3);
    const auto& u = recurrent_u3();
    Peak tw, tv_form, tv_second;
    for (const auto& p : sample_points(E, cfg))
      for (int i = 0; i < 3; ++i) {
        const Vec X = Vec::Unit(3, i);
        const auto Xg = geodesic_extension(E, p, X);
        const auto t = tw_tv_general(E, sasaki, u, p, Xg);
        const double rX = rho.at(p).dot(X);
        tw(t.tw.norm());
        tv_form(rel(t.tv, (covariant_derivative_form(E, rho, X, X, p) + rX * rX) * u.at(p)));
        tv_second(rel(t.tv, second_covariant(E, u, Xg, p)));
      }
    report(7, tw.value <= 1e-8 && tv_form.value <= 1e-6 && tv_second.value <= 1e-6, "sasaki recurrent reduction",
           fmt("|T_W| %.2e (tol 1e-08); ", tw.value) + fmt("T_V vs second covariant %.2e; ", tv_second.value) +
               fmt("vs [(nabla rho)(X) + rho(X)^2]u %.2e (tol 1e-06)", tv_form.value));
  });

  criterion(8, "recurrent example family is totally geodesic", [&] {
    const auto gen = construct_recurrent_example(1.0, ScalarFn::constant(1.0), 0.1);
    Peak sff, ode;
    std::size_t samples = 0, errors = 0;
    for (int n : {2, 3}) {
      const auto M = manifolds::euclidean(n);
      Vec v = Vec::Zero(n);
      v[0] = 0.6;
      v[1] = 0.8;
      const auto u = test::exponential_field(v, 0.3);
      const auto pts = sample_graph_points(M, gen, u, cfg, 0.5, 10.0);
      const auto rep = totally_geodesic_test(M, gen, u, pts);
      sff(rep.max_sff);
      samples += rep.records.size();
      errors += rep.failed_samples;
    }
    for (int k = 0; k <= 100; ++k) ode(std::abs(recurrent_example_residual(gen, 0.5 + 9.5 * k / 100.0)));
    report(8, sff.value < 1e-5 && ode.value <= 1e-8 && errors == 0 && samples == 40,
           "recurrent example family is totally geodesic",
           fmt("max |II| %.2e (tol 1e-05) on t in [0.5, 10]; ", sff.value) + fmt("ODE residual %.2e (tol 1e-08)", ode.value));
  });

  criterion(9, "T_W/T_V ledger against the oracle second fundamental form", [&] {
    const std::vector<ChartManifold> mans{manifolds::sphere2(), manifolds::perturbed(3), manifolds::poincare_half_plane(),
                                          manifolds::sphere_times_line(), manifolds::cone_over_flat_torus()};
    Peak ledger;
    std::size_t errors = 0;
    for (int k = 0; k < 50; ++k) {
      const auto& M = mans[static_cast<std::size_t>(k) % mans.size()];
      const auto gen = random_polynomial_family(1000 + static_cast<std::uint64_t>(k));
      const auto u = test::wobbly_field(M.dim());
      const auto pts = sample_graph_points(M, gen, u, {1, 5000 + static_cast<std::uint64_t>(k), 0.1}, 0.0, 10.0);
      const auto rep = totally_geodesic_test(M, gen, u, pts);
      ledger(rep.max_ledger_residual);
      errors += rep.failed_samples + (pts.size() == 1 ? 0 : 1);
    }
    report(9, ledger.value <= 1e-5 && errors == 0, "T_W/T_V ledger against the oracle second fundamental form",
           fmt("max relative residual %.2e over 50 configurations, tol 1e-05", ledger.value));
  });

  criterion(10, "non-degeneracy verdicts", [&] {
    const bool s = check_nondegenerate(sasaki, 10.0, 1001).pass;
    const bool cg = check_nondegenerate(preset("cheeger_gromoll"), 10.0, 1001).pass;
    const auto bad = parse_metric(Json{{"name", "a_vanishes"}, {"a1", "1"}, {"a2", "1"}, {"a3", "0"}});
    const bool b = check_nondegenerate(bad, 10.0, 1001).pass;
    report(10, s && cg && !b, "non-degeneracy verdicts",
           std::string("sasaki ") + (s ? "pass" : "fail") + ", cheeger_gromoll " + (cg ? "pass" : "fail") +
               ", a = 0 counterexample " + (b ? "pass" : "fail"));
  });

  criterion(11, "reports are reproducible", [&] {
    std::size_t same = 0, total = 0;
    for (const auto& name : scenario_preset_names()) {
      const auto sc = load_scenario("preset:" + name);
      const std::string a = report_body(run_scenario(sc, {Execution::parallel, "preset:" + name}));
      const std::string b = report_body(run_scenario(sc, {Execution::parallel, "preset:" + name}));
      const std::string c = report_body(run_scenario(sc, {Execution::serial, "preset:" + name}));
      same += (a == b && a == c) ? 1 : 0;
      ++total;
    }
    report(11, same == total, "reports are reproducible",
           std::to_string(same) + "/" + std::to_string(total) + " presets byte-identical across three runs");
  });

  std::printf("%s\n", failures == 0 ? "all criteria pass" : (std::to_string(failures) + " criteria fail").c_str());
  return failures == 0 ? 0 : 1;
}
