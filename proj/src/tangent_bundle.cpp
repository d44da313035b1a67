#include "gnb/tangent_bundle.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"

namespace gnb {

namespace {

constexpr double kBundleStep = 1e-5;

double step(double coord) { return kBundleStep * std::max(1.0, std::abs(coord)); }

// u^s W^t Γ^r_st
Vec connection_term(const Christoffel& gam, const Vec& u, const Vec& W) { return gam.contract(u, W); }

double lift_metric(const Mat& g, const Vec& u, const GeneratorValues& v, bool drop_b, const BundleVector& P,
                   const BundleVector& Q) {
  auto ip = [&](const Vec& a, const Vec& b) { return a.dot(g * b); };
  const double A = v.a1 + v.a3;
  double s = A * ip(P.hor, Q.hor) + v.a2 * (ip(P.hor, Q.ver) + ip(P.ver, Q.hor)) + v.a1 * ip(P.ver, Q.ver);
  if (!drop_b) {
    const double B = v.b1 + v.b3;
    const double ph = ip(P.hor, u), pv = ip(P.ver, u), qh = ip(Q.hor, u), qv = ip(Q.ver, u);
    s += B * ph * qh + v.b2 * (ph * qv + pv * qh) + v.b1 * pv * qv;
  }
  return s;
}

Mat metric_matrix(const ChartManifold& M, const GeneratorSet& gen, const TangentPoint& z, const Christoffel& gam) {
  const int n = M.dim();
  const Mat g = M.metric_at(z.x);
  const GeneratorValues v = values_at(gen, inner(g, z.u, z.u));
  std::vector<BundleVector> basis;
  basis.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    const Vec e = Vec::Unit(n, i);
    basis.push_back({e, connection_term(gam, z.u, e)});
  }
  for (int i = 0; i < n; ++i) basis.push_back({Vec::Zero(n), Vec::Unit(n, i)});
  Mat G(2 * n, 2 * n);
  for (int a = 0; a < 2 * n; ++a)
    for (int b = a; b < 2 * n; ++b) G(a, b) = G(b, a) = lift_metric(g, z.u, v, n == 1, basis[a], basis[b]);
  return G;
}

}  // namespace

Vec TangentPoint::coords() const {
  Vec z(x.size() + u.size());
  z << x, u;
  return z;
}

TangentPoint TangentPoint::from_coords(const Vec& z) {
  const auto n = z.size() / 2;
  return {z.head(n), z.tail(n)};
}

Vec horizontal_lift(const ChartManifold& M, const Vec& X, const TangentPoint& z) {
  return assemble(M, {X, Vec::Zero(M.dim())}, z);
}

Vec vertical_lift(const Vec& X) {
  Vec out(2 * X.size());
  out << Vec::Zero(X.size()), X;
  return out;
}

BundleVector split(const ChartManifold& M, const Vec& W, const TangentPoint& z) {
  const int n = M.dim();
  const Vec hor = W.head(n);
  return {hor, W.tail(n) + connection_term(christoffel_at(M, z.x), z.u, hor)};
}

Vec assemble(const ChartManifold& M, const BundleVector& P, const TangentPoint& z) {
  const int n = M.dim();
  Vec out(2 * n);
  out << P.hor, P.ver - connection_term(christoffel_at(M, z.x), z.u, P.hor);
  return out;
}

double bundle_metric(const ChartManifold& M, const GeneratorSet& gen, const TangentPoint& z, const BundleVector& P,
                     const BundleVector& Q) {
  const Mat g = M.metric_at(z.x);
  const GeneratorValues v = values_at(gen, inner(g, z.u, z.u));
  return lift_metric(g, z.u, v, M.dim() == 1, P, Q);
}

Mat bundle_metric_matrix(const ChartManifold& M, const GeneratorSet& gen, const TangentPoint& z) {
  return metric_matrix(M, gen, z, christoffel_at(M, z.x));
}

Vec BundleChristoffel::contract(const Vec& P, const Vec& Q) const {
  Vec out = Vec::Zero(dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      if (P[b] == 0.0) continue;
      for (int c = 0; c < dim; ++c) out[a] += (*this)(a, b, c) * P[b] * Q[c];
    }
  return out;
}

BundleChristoffel bundle_christoffel(const ChartManifold& M, const GeneratorSet& gen, const TangentPoint& z) {
  const int N = 2 * M.dim();
  const Vec zc = z.coords();
  const Mat G = bundle_metric_matrix(M, gen, z);

  Eigen::JacobiSVD<Mat> svd(G);
  const auto& sv = svd.singularValues();
  if (!(sv[N - 1] > 0.0) || sv[0] / sv[N - 1] > kSingularCondition)
    throw Error(ErrorCode::SingularMetric, "bundle metric is singular or ill-conditioned");
  const Mat Ginv = G.inverse();

  std::vector<Mat> dG(N);  // dG[c](a,b) = ∂_c G_ab
  for (int c = 0; c < N; ++c) {
    auto G_at = [&](double d) {
      Vec zd = zc;
      zd[c] += d;
      return bundle_metric_matrix(M, gen, TangentPoint::from_coords(zd));
    };
    dG[c] = kernels::richardson_derivative(G_at, step(zc[c]));
  }

  BundleChristoffel out;
  out.dim = N;
  out.values.assign(static_cast<std::size_t>(N * N * N), 0.0);
  for (int b = 0; b < N; ++b)
    for (int c = b; c < N; ++c) {
      Vec first(N);  // Γ_{d,bc}
      for (int d = 0; d < N; ++d) first[d] = 0.5 * (dG[b](d, c) + dG[c](d, b) - dG[d](b, c));
      const Vec second = Ginv * first;
      for (int a = 0; a < N; ++a) out.values[(a * N + b) * N + c] = out.values[(a * N + c) * N + b] = second[a];
    }
  return out;
}

Vec covariant_derivative_along(const ChartManifold& M, const GeneratorSet& gen, const BundleCurve& c,
                               const BundleCurve& V, double s) {
  const double h = kBundleStep * std::max(1.0, std::abs(s));
  const Vec cdot = kernels::richardson_derivative([&](double d) { return c(s + d); }, h);
  const Vec vdot = kernels::richardson_derivative([&](double d) { return V(s + d); }, h);
  const auto gam = bundle_christoffel(M, gen, TangentPoint::from_coords(c(s)));
  return vdot + gam.contract(cdot, V(s));
}

}  // namespace gnb
