#include <doctest.h>

#include <cmath>

#include "gnb/manifold.hpp"
#include "oracles.hpp"

using namespace gnb;
using gnb::test::vec;

TEST_CASE("christoffel symbols vanish for a constant metric") {
  const auto M = manifolds::euclidean(3);
  const auto G = christoffel_at(M, vec({0.3, -1.2, 2.0}));
  for (double v : G.values) CHECK(v == 0.0);
}

TEST_CASE("sphere christoffel symbols match the closed form and the difference oracle") {
  const auto M = manifolds::sphere2();
  for (double th : {0.4, 1.1, 2.5}) {
    const Vec x = vec({th, 0.7});
    const auto G = christoffel_at(M, x);
    CHECK(G(0, 1, 1) == doctest::Approx(-std::sin(th) * std::cos(th)).epsilon(1e-12));
    CHECK(G(1, 0, 1) == doctest::Approx(std::cos(th) / std::sin(th)).epsilon(1e-12));
    CHECK(G(1, 1, 0) == doctest::Approx(G(1, 0, 1)).epsilon(1e-14));
    const auto fd = test::fd_christoffel(M, x);
    for (std::size_t q = 0; q < fd.size(); ++q) CHECK(std::abs(G.values[q] - fd[q]) < 1e-8);
  }
}

TEST_CASE("half-plane christoffel symbols") {
  const auto M = manifolds::poincare_half_plane();
  const Vec x = vec({0.2, 0.8});
  const auto G = christoffel_at(M, x);
  CHECK(G(0, 0, 1) == doctest::Approx(-1.0 / 0.8));
  CHECK(G(1, 0, 0) == doctest::Approx(1.0 / 0.8));
  CHECK(G(1, 1, 1) == doctest::Approx(-1.0 / 0.8));
  const auto fd = test::fd_christoffel(M, x);
  for (std::size_t q = 0; q < fd.size(); ++q) CHECK(std::abs(G.values[q] - fd[q]) < 1e-7);
}

TEST_CASE("dual and central-difference modes agree") {
  for (const auto& name : {"sphere2", "poincare_half_plane", "perturbed3", "cone_over_flat_torus"}) {
    const auto M = manifolds::by_name(name);
    const auto pts = sample_points(M, {5, 3, 0.1});
    const auto Mc = M.with_diff_mode(DiffMode::central_difference);
    for (const auto& x : pts) {
      const auto a = christoffel_at(M, x), b = christoffel_at(Mc, x);
      for (std::size_t q = 0; q < a.values.size(); ++q) CHECK(std::abs(a.values[q] - b.values[q]) < 1e-6);
      const auto ra = riemann_at(M, x), rb = riemann_at(Mc, x);
      for (std::size_t q = 0; q < ra.lowered.size(); ++q) CHECK(std::abs(ra.lowered[q] - rb.lowered[q]) < 1e-4);
    }
  }
}

TEST_CASE("riemann tensor against the difference oracle") {
  for (const auto& name : {"sphere2", "poincare_half_plane", "perturbed3", "sphere_times_line"}) {
    const auto M = manifolds::by_name(name);
    for (const auto& x : sample_points(M, {4, 11, 0.1})) {
      const auto R = riemann_at(M, x);
      const auto fd = test::fd_riemann_mixed(M, x);
      for (std::size_t q = 0; q < fd.size(); ++q) CHECK(std::abs(R.mixed[q] - fd[q]) < 1e-5 * (1 + std::abs(fd[q])));
    }
  }
}

TEST_CASE("flat charts have zero curvature") {
  for (const auto& M : {manifolds::euclidean(2), manifolds::euclidean(3), manifolds::flat_torus(2)}) {
    const auto R = riemann_at(M, Vec::Constant(M.dim(), 0.4));
    for (double v : R.lowered) CHECK(v == 0.0);
  }
}

TEST_CASE("sectional curvature of the sphere and the half-plane") {
  auto sectional = [](const ChartManifold& M, const Vec& x) {
    const Vec X = Vec::Unit(2, 0), Y = Vec::Unit(2, 1);
    const Mat g = M.metric_at(x);
    const double area = inner(g, X, X) * inner(g, Y, Y) - std::pow(inner(g, X, Y), 2);
    return riemann_at(M, x).eval(X, Y, Y, X) / area;
  };
  for (const auto& x : sample_points(manifolds::sphere2(), {6, 2, 0.1}))
    CHECK(sectional(manifolds::sphere2(), x) == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& x : sample_points(manifolds::poincare_half_plane(), {6, 2, 0.1}))
    CHECK(std::abs(sectional(manifolds::poincare_half_plane(), x) + 1.0) < 1e-6);
}

TEST_CASE("curvature symmetries and the first Bianchi identity") {
  const auto M = manifolds::perturbed(3, 0.2);
  const int n = 3;
  for (const auto& x : sample_points(M, {3, 5, 0.1})) {
    const auto R = riemann_at(M, x);
    double scale = 1e-12;
    for (double v : R.lowered) scale = std::max(scale, std::abs(v));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            CHECK(std::abs(R(i, j, k, l) + R(j, i, k, l)) < 1e-10 * scale);
            CHECK(std::abs(R(i, j, k, l) + R(i, j, l, k)) < 1e-10 * scale);
            CHECK(std::abs(R(i, j, k, l) - R(k, l, i, j)) < 1e-10 * scale);
            CHECK(std::abs(R(i, j, k, l) + R(j, k, i, l) + R(k, i, j, l)) < 1e-10 * scale);
          }
  }
}

TEST_CASE("the connection is metric compatible") {
  // X g(Y,Z) = g(∇_X Y, Z) + g(Y, ∇_X Z) for fields Y, Z.
  const auto M = manifolds::sphere_times_line();
  const VectorField Y = test::wobbly_field(3);
  const VectorField Z = test::position_field(3);
  std::mt19937_64 rng(4);
  for (const auto& x : sample_points(M, {5, 9, 0.1})) {
    const Vec X = test::random_vec(rng, 3);
    const double h = 1e-5;
    auto gyz = [&](const Vec& y) { return inner(M.metric_at(y), Y.at(y), Z.at(y)); };
    const double lhs = (gyz(x + h * X) - gyz(x - h * X)) / (2 * h);
    const Mat g = M.metric_at(x);
    const double rhs =
        inner(g, covariant_derivative(M, Y, X, x), Z.at(x)) + inner(g, Y.at(x), covariant_derivative(M, Z, X, x));
    CHECK(std::abs(lhs - rhs) < 1e-7);
  }
}

TEST_CASE("covariant derivative examples") {
  const auto E = manifolds::euclidean(3);
  const Vec x = vec({0.1, 0.2, 0.3}), X = vec({1.0, -2.0, 0.5});
  CHECK(covariant_derivative(E, VectorField::constant(vec({1, 2, 3})), X, x).norm() == 0.0);
  CHECK((covariant_derivative(E, test::position_field(3), X, x) - X).norm() < 1e-15);

  const auto S = manifolds::sphere2();
  const double th = 0.9;
  const Vec d = covariant_derivative(S, VectorField::constant(vec({0, 1})), vec({1, 0}), vec({th, 0.3}));
  CHECK(d[0] == doctest::Approx(0.0));
  CHECK(d[1] == doctest::Approx(std::cos(th) / std::sin(th)));
}

TEST_CASE("second covariant derivative of a recurrent field") {
  const auto M = manifolds::euclidean(2);
  const double lambda = 0.3;
  const VectorField u = test::exponential_field(vec({0.6, 0.8}), lambda);
  const Vec x = vec({0.5, -0.4});
  for (const Vec& X : {vec({1, 0}), vec({0.3, 0.7})}) {
    const Vec lhs = second_covariant(M, u, VectorField::constant(X), x);
    const double r = lambda * X[0];
    CHECK((lhs - r * r * u.at(x)).norm() < 1e-10);
  }
  CHECK(second_covariant(M, VectorField::constant(vec({1, 1})), VectorField::constant(vec({2, 0})), x).norm() == 0.0);
}

TEST_CASE("geodesic extension has vanishing self-derivative") {
  const auto M = manifolds::sphere2();
  const Vec x = vec({1.0, 0.2}), X = vec({0.3, -0.8});
  const VectorField Xg = geodesic_extension(M, x, X);
  CHECK((Xg.at(x) - X).norm() < 1e-15);
  CHECK(covariant_derivative(M, Xg, X, x).norm() < 1e-12);
}

TEST_CASE("field classification") {
  const auto E = manifolds::euclidean(3);
  const auto pts = sample_points(E, {4, 1, 0.1});
  CHECK(classify_field(E, VectorField::constant(vec({1, 0, 2})), pts).kind == FieldClass::parallel);

  const auto c = classify_field(E, test::position_field(3), pts);
  CHECK(c.kind == FieldClass::concircular);
  for (const auto& p : c.points) CHECK(p.alpha == doctest::Approx(1.0));

  const auto r = classify_field(E, test::exponential_field(vec({0.6, 0.8, 0.0}), 0.3), pts);
  CHECK(r.kind == FieldClass::recurrent);
  for (const auto& p : r.points) {
    CHECK(p.rho[0] == doctest::Approx(0.3));
    CHECK(std::abs(p.rho[1]) < 1e-9);
  }

  CHECK(classify_field(E, test::wobbly_field(3), pts).kind == FieldClass::generic);
  CHECK(classify_field(E, VectorField::constant(Vec::Zero(3)), pts).kind == FieldClass::parallel);
}

TEST_CASE("torse-forming classification") {
  // u = e^{x¹} x: ∇_X u = X¹ u + e^{x¹} X, so ρ = dx¹ and α = e^{x¹}.
  const auto E = manifolds::euclidean(2);
  const auto u = VectorField::from(2, [](auto x, auto y) {
    using std::exp;
    y[0] = exp(x[0]) * x[0];
    y[1] = exp(x[0]) * x[1];
  });
  const auto pts = sample_points(E, {3, 8, 0.1});
  const auto c = classify_field(E, u, pts);
  CHECK(c.kind == FieldClass::torse_forming);
  for (const auto& p : c.points) {
    CHECK(p.alpha == doctest::Approx(std::exp(p.x[0])));
    CHECK(p.rho[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("sampling is deterministic and respects the domain") {
  const auto M = manifolds::poincare_half_plane();
  const auto a = sample_points(M, {10, 42, 0.1});
  const auto b = sample_points(M, {10, 42, 0.1});
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    CHECK(M.contains(a[i]));
  }
  CHECK(sample_points(M, {10, 43, 0.1})[0] != a[0]);
}

TEST_CASE("errors") {
  const auto S = manifolds::sphere2();
  CHECK_THROWS_AS(christoffel_at(S, vec({0.0, 0.0})), Error);
  try {
    christoffel_at(manifolds::poincare_half_plane(), vec({0.0, -1.0}));
    FAIL("expected OutOfDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfDomain);
  }
  CHECK_THROWS_AS(manifolds::by_name("klein_bottle"), Error);
}
