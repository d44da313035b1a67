#include <doctest.h>

#include <cmath>

#include "gnb/tangent_bundle.hpp"
#include "oracles.hpp"

using namespace gnb;
using gnb::test::vec;

namespace {

Mat fd_bundle_metric_derivative(const ChartManifold& M, const GeneratorSet& gen, const Vec& z, int c, double h) {
  Vec zp = z, zm = z;
  zp[c] += h;
  zm[c] -= h;
  return (bundle_metric_matrix(M, gen, TangentPoint::from_coords(zp)) -
          bundle_metric_matrix(M, gen, TangentPoint::from_coords(zm))) /
         (2 * h);
}

}  // namespace

TEST_CASE("horizontal lift examples") {
  const auto E = manifolds::euclidean(2);
  const TangentPoint ze{vec({0.2, 0.1}), vec({1.0, -2.0})};
  CHECK(horizontal_lift(E, vec({0.5, 0.7}), ze) == vec({0.5, 0.7, 0.0, 0.0}));

  const auto S = manifolds::sphere2();
  const double th = 1.2;
  const TangentPoint z{vec({th, 0.4}), vec({0.0, 1.0})};
  const Vec h = horizontal_lift(S, vec({1.0, 0.0}), z);
  CHECK(h[0] == 1.0);
  CHECK(h[1] == 0.0);
  CHECK(std::abs(h[2]) < 1e-14);
  CHECK(h[3] == doctest::Approx(-std::cos(th) / std::sin(th)));

  const TangentPoint z0{vec({th, 0.4}), Vec::Zero(2)};
  CHECK(horizontal_lift(S, vec({0.3, -0.2}), z0) == vec({0.3, -0.2, 0.0, 0.0}));
  CHECK(vertical_lift(vec({0.3, -0.2})) == vec({0.0, 0.0, 0.3, -0.2}));
}

TEST_CASE("split recovers lifts and inverts assemble") {
  const auto S = manifolds::sphere2();
  const TangentPoint z{vec({0.9, 0.3}), vec({0.4, -0.7})};
  const Vec X = vec({0.6, 1.1});
  const auto sh = split(S, horizontal_lift(S, X, z), z);
  CHECK((sh.hor - X).norm() < 1e-15);
  CHECK(sh.ver.norm() < 1e-15);
  const auto sv = split(S, vertical_lift(X), z);
  CHECK(sv.hor.norm() == 0.0);
  CHECK((sv.ver - X).norm() == 0.0);

  // ∂_i splits as (e_i, u^s Γ^r_si e_r).
  const auto G = christoffel_at(S, z.x);
  for (int i = 0; i < 2; ++i) {
    Vec W = Vec::Zero(4);
    W[i] = 1.0;
    const auto s = split(S, W, z);
    CHECK(s.hor == Vec::Unit(2, i));
    for (int r = 0; r < 2; ++r) {
      double expect = 0.0;
      for (int q = 0; q < 2; ++q) expect += z.u[q] * G(r, q, i);
      CHECK(s.ver[r] == doctest::Approx(expect));
    }
  }

  std::mt19937_64 rng(100);
  const auto M = manifolds::perturbed(3, 0.1);
  for (int k = 0; k < 100; ++k) {
    const TangentPoint zz{test::random_vec(rng, 3), test::random_vec(rng, 3, 2.0)};
    const Vec W = test::random_vec(rng, 6);
    CHECK((assemble(M, split(M, W, zz), zz) - W).norm() < 1e-13);
  }
}

TEST_CASE("bundle metric on lifts") {
  const auto S = manifolds::sphere2();
  const TangentPoint z{vec({1.1, 0.5}), vec({0.3, 0.8})};
  const Mat g = S.metric_at(z.x);
  const BundleVector P{vec({0.2, -0.4}), vec({1.0, 0.3})}, Q{vec({-0.7, 0.1}), vec({0.5, 0.9})};
  CHECK(bundle_metric(S, preset("sasaki"), z, P, Q) ==
        doctest::Approx(inner(g, P.hor, Q.hor) + inner(g, P.ver, Q.ver)));

  const auto CG = preset("cheeger_gromoll");
  const auto E = manifolds::euclidean(2);
  const TangentPoint z1{vec({0.0, 0.0}), vec({0.6, 0.8})};  // t = 1
  const BundleVector U{Vec::Zero(2), z1.u};
  CHECK(bundle_metric(E, CG, z1, U, U) == doctest::Approx(1.0));

  const BundleVector H{vec({1.0, 2.0}), Vec::Zero(2)}, V{Vec::Zero(2), vec({-1.0, 0.5})};
  CHECK(bundle_metric(S, CG, z, H, V) == 0.0);
  CHECK(bundle_metric(S, CG, z, P, Q) == doctest::Approx(bundle_metric(S, CG, z, Q, P)));
}

TEST_CASE("bundle metric matrix agrees with the lift formulas") {
  std::mt19937_64 rng(5);
  const auto M = manifolds::sphere2();
  const auto gen = random_polynomial_family(7);
  const Vec x = vec({1.0, 0.2});
  for (int k = 0; k < 100; ++k) {
    const TangentPoint z{x, test::random_vec(rng, 2, 1.5)};
    const Mat G = bundle_metric_matrix(M, gen, z);
    CHECK((G - G.transpose()).norm() == 0.0);
    const Vec W1 = test::random_vec(rng, 4), W2 = test::random_vec(rng, 4);
    const double direct = bundle_metric(M, gen, z, split(M, W1, z), split(M, W2, z));
    CHECK(W1.dot(G * W2) == doctest::Approx(direct).epsilon(1e-12));
  }

  const auto E = manifolds::euclidean(3);
  const Mat G = bundle_metric_matrix(E, preset("sasaki"), {vec({0.1, 0.2, 0.3}), vec({1, 1, 1})});
  CHECK((G - Mat::Identity(6, 6)).norm() == 0.0);

  const auto CG = preset("cheeger_gromoll");
  for (const auto& x2 : sample_points(M, {10, 3, 0.1}))
    CHECK(std::abs(bundle_metric_matrix(M, CG, {x2, vec({0.5, -0.3})}).determinant()) > 1e-6);
}

TEST_CASE("bundle christoffel symbols") {
  const auto E = manifolds::euclidean(2);
  const auto c0 = bundle_christoffel(E, preset("sasaki"), {vec({0.1, 0.2}), vec({0.5, 0.5})});
  for (double v : c0.values) CHECK(v == 0.0);

  // Torsion-free by construction and compatible with G: ∂_c G_ab = Γ_{a,cb} + Γ_{b,ca}.
  const auto S = manifolds::sphere2();
  const auto CG = preset("cheeger_gromoll");
  std::mt19937_64 rng(8);
  for (const auto& x : sample_points(S, {5, 4, 0.1})) {
    const TangentPoint z{x, test::random_vec(rng, 2)};
    const auto Gam = bundle_christoffel(S, CG, z);
    const Mat G = bundle_metric_matrix(S, CG, z);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) CHECK(Gam(a, b, c) == Gam(a, c, b));
    for (int c = 0; c < 4; ++c) {
      const Mat dG = fd_bundle_metric_derivative(S, CG, z.coords(), c, 1e-6);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          double rhs = 0.0;
          for (int d = 0; d < 4; ++d) rhs += G(a, d) * Gam(d, c, b) + G(b, d) * Gam(d, c, a);
          CHECK(std::abs(dG(a, b) - rhs) < 1e-5);
        }
    }
  }
}

TEST_CASE("singular bundle metric is reported") {
  GeneratorSet bad{"bad",
                   ScalarFn::constant(1.0),
                   ScalarFn::constant(1.0),
                   ScalarFn::constant(0.0),
                   ScalarFn::constant(0.0),
                   ScalarFn::constant(0.0),
                   ScalarFn::constant(0.0),
                   {}};
  try {
    bundle_christoffel(manifolds::euclidean(2), bad, {vec({0, 0}), vec({1, 0})});
    FAIL("expected SingularMetric");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularMetric);
  }
}

TEST_CASE("covariant derivative along curves") {
  const auto S = manifolds::sphere2();
  const auto CG = preset("cheeger_gromoll");
  const Vec z0 = vec({1.0, 0.3, 0.2, -0.4});
  const Vec V0 = vec({0.1, 0.2, 0.3, 0.4});
  CHECK(covariant_derivative_along(
            S, CG, [&](double) { return z0; }, [&](double) { return V0; }, 0.0)
            .norm() < 1e-12);

  // d/ds G(V,W) = G(DV/ds, W) + G(V, DW/ds)
  auto c = [](double s) { return vec({1.0 + 0.3 * s, 0.3 - 0.2 * s, 0.2 + s * s, -0.4 + 0.5 * s}); };
  auto V = [](double s) { return vec({std::cos(s), 0.2, s, 1.0 - s}); };
  auto W = [](double s) { return vec({0.5, std::sin(s), 0.3, s * s}); };
  const double s = 0.2, h = 1e-5;
  auto GVW = [&](double q) {
    return V(q).dot(bundle_metric_matrix(S, CG, TangentPoint::from_coords(c(q))) * W(q));
  };
  const double lhs = (GVW(s + h) - GVW(s - h)) / (2 * h);
  const Mat G = bundle_metric_matrix(S, CG, TangentPoint::from_coords(c(s)));
  const double rhs = covariant_derivative_along(S, CG, c, V, s).dot(G * W(s)) +
                     V(s).dot(G * covariant_derivative_along(S, CG, c, W, s));
  CHECK(std::abs(lhs - rhs) < 1e-5);
}

TEST_CASE("parallel transport along a bundle curve") {
  // Integrate dV/ds = −Γ̃(ċ, V) with RK4, then the covariant derivative of the
  // interpolated solution vanishes.
  const auto S = manifolds::sphere2();
  const auto CG = preset("cheeger_gromoll");
  auto c = [](double s) { return vec({1.0 + 0.2 * s, 0.3 + 0.4 * s, 0.5 - 0.3 * s, 0.2 + 0.1 * s}); };
  const Vec cdot = vec({0.2, 0.4, -0.3, 0.1});
  auto rhs = [&](double s, const Vec& V) {
    return Vec(-bundle_christoffel(S, CG, TangentPoint::from_coords(c(s))).contract(cdot, V));
  };
  const double ds = 1e-3;
  const int steps = 400;
  std::vector<Vec> sol{vec({1.0, 0.0, 0.5, -0.5})};
  for (int k = 0; k < steps; ++k) {
    const double s = k * ds;
    const Vec& V = sol.back();
    const Vec k1 = rhs(s, V), k2 = rhs(s + ds / 2, V + ds / 2 * k1), k3 = rhs(s + ds / 2, V + ds / 2 * k2),
              k4 = rhs(s + ds, V + ds * k3);
    sol.push_back(V + ds / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
  }
  // Cubic interpolation through four nodes around s = 0.2.
  auto Vs = [&](double s) {
    const int i0 = static_cast<int>(std::floor(s / ds)) - 1;
    Vec out = Vec::Zero(4);
    for (int a = 0; a < 4; ++a) {
      double w = 1.0;
      for (int b = 0; b < 4; ++b)
        if (b != a) w *= (s - (i0 + b) * ds) / ((a - b) * ds);
      out += w * sol[static_cast<std::size_t>(i0 + a)];
    }
    return out;
  };
  CHECK(covariant_derivative_along(S, CG, c, Vs, 0.2 + 0.5 * ds).norm() < 1e-4);
}
