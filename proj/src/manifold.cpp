#include "gnb/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kernels.hpp"

namespace gnb {

namespace {

constexpr double kFirstStep = 1e-5;
constexpr double kSecondStep = 1e-4;

double step(double base, double coord) { return base * std::max(1.0, std::abs(coord)); }

void check_metric(const ChartManifold& M, const Vec& x) {
  if (!M.contains(x)) throw Error(ErrorCode::OutOfDomain, "point outside the chart domain of " + M.name());
  Eigen::SelfAdjointEigenSolver<Mat> es(M.metric_at(x), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0)) throw Error(ErrorCode::SingularMetric, "metric of " + M.name() + " is not positive definite");
  if (hi / lo > kSingularCondition)
    throw Error(ErrorCode::SingularMetric, "metric of " + M.name() + " is ill-conditioned");
}

std::vector<double> christoffel_fd(const ChartManifold& M, const Vec& x) {
  const int n = M.dim();
  auto xs = kernels::to_std(x);
  std::vector<double> g = M.metric<double>(xs);
  std::vector<double> dg(static_cast<std::size_t>(n * n * n), 0.0);
  for (int m = 0; m < n; ++m) {
    const double h = step(kFirstStep, x[m]);
    auto xp = xs, xm = xs;
    xp[m] += h;
    xm[m] -= h;
    auto gp = M.metric<double>(xp);
    auto gm = M.metric<double>(xm);
    for (int k = 0; k < n * n; ++k) dg[m * n * n + k] = (gp[k] - gm[k]) / (2.0 * h);
  }
  return kernels::christoffel_from(g, dg, n);
}

std::vector<double> christoffel_values(const ChartManifold& M, const Vec& x) {
  if (M.diff_mode() == DiffMode::central_difference) return christoffel_fd(M, x);
  auto xs = kernels::to_std(x);
  return kernels::christoffel<double>(M, std::span<const double>(xs));
}

}  // namespace

ChartManifold::ChartManifold(std::string name, int dim, SmoothMap metric, DomainPredicate domain, Box sampling_box)
    : name_(std::move(name)), dim_(dim), metric_(std::move(metric)), domain_(std::move(domain)),
      box_(std::move(sampling_box)) {
  if (dim_ <= 0) throw Error(ErrorCode::Unsupported, "manifold dimension must be positive");
  if (metric_.in_dim() != dim_ || metric_.out_dim() != dim_ * dim_)
    throw Error(ErrorCode::Unsupported, "metric map has the wrong shape for dimension " + std::to_string(dim_));
}

ChartManifold ChartManifold::with_diff_mode(DiffMode mode) const {
  ChartManifold copy = *this;
  copy.mode_ = mode;
  return copy;
}

Mat ChartManifold::metric_at(const Vec& x) const {
  auto xs = kernels::to_std(x);
  auto g = metric<double>(xs);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(g.data(), dim_, dim_);
}

VectorField VectorField::constant(const Vec& v) {
  std::vector<double> c = kernels::to_std(v);
  return VectorField::from(static_cast<int>(v.size()), [c](auto, auto y) {
    for (std::size_t i = 0; i < c.size(); ++i) y[i] = c[i];
  });
}

Vec VectorField::at(const Vec& x) const {
  auto xs = kernels::to_std(x);
  return kernels::to_eigen(map_(xs));
}

CovectorField CovectorField::constant(const Vec& v) {
  std::vector<double> c = kernels::to_std(v);
  return CovectorField::from(static_cast<int>(v.size()), [c](auto, auto y) {
    for (std::size_t i = 0; i < c.size(); ++i) y[i] = c[i];
  });
}

Vec CovectorField::at(const Vec& x) const {
  auto xs = kernels::to_std(x);
  return kernels::to_eigen(map_(xs));
}

ScalarField ScalarField::constant(int dim, double c) {
  return ScalarField::from(dim, [c](auto, auto y) { y[0] = c; });
}

double ScalarField::at(const Vec& x) const {
  auto xs = kernels::to_std(x);
  return map_(xs)[0];
}

Vec Christoffel::contract(const Vec& X, const Vec& Y) const {
  Vec out = Vec::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[k] += (*this)(k, i, j) * X[i] * Y[j];
  return out;
}

Vec CurvatureAtPoint::apply(const Vec& X, const Vec& Y, const Vec& Z) const {
  Vec out = Vec::Zero(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) out[l] += mixed[((l * n + i) * n + j) * n + k] * X[i] * Y[j] * Z[k];
  return out;
}

double CurvatureAtPoint::eval(const Vec& X, const Vec& Y, const Vec& Z, const Vec& W) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s += (*this)(i, j, k, l) * X[i] * Y[j] * Z[k] * W[l];
  return s;
}

Christoffel christoffel_at(const ChartManifold& M, const Vec& x) {
  check_metric(M, x);
  return Christoffel{M.dim(), christoffel_values(M, x)};
}

CurvatureAtPoint riemann_at(const ChartManifold& M, const Vec& x) {
  check_metric(M, x);
  const int n = M.dim();
  const auto N3 = static_cast<std::size_t>(n * n * n);
  std::vector<double> gam = christoffel_values(M, x);
  std::vector<double> dgam(N3 * n, 0.0);  // [m][k][i][j] = ∂_m Γ^k_ij
  auto xs = kernels::to_std(x);
  for (int m = 0; m < n; ++m) {
    if (M.diff_mode() == DiffMode::forward_dual) {
      auto xd = kernels::seed_axis<double>(xs, m);
      auto gd = kernels::christoffel<D1>(M, std::span<const D1>(xd));
      for (std::size_t q = 0; q < N3; ++q) dgam[m * N3 + q] = gd[q].eps;
    } else {
      const double h = step(kSecondStep, x[m]);
      Vec xp = x, xm = x;
      xp[m] += h;
      xm[m] -= h;
      auto gp = christoffel_fd(M, xp);
      auto gm = christoffel_fd(M, xm);
      for (std::size_t q = 0; q < N3; ++q) dgam[m * N3 + q] = (gp[q] - gm[q]) / (2.0 * h);
    }
  }
  auto G = [&](int k, int i, int j) { return gam[(k * n + i) * n + j]; };
  auto dG = [&](int m, int k, int i, int j) { return dgam[m * N3 + (k * n + i) * n + j]; };

  CurvatureAtPoint R;
  R.n = n;
  R.mixed.assign(N3 * n, 0.0);
  R.lowered.assign(N3 * n, 0.0);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double v = dG(i, l, j, k) - dG(j, l, i, k);
          for (int m = 0; m < n; ++m) v += G(l, i, m) * G(m, j, k) - G(l, j, m) * G(m, i, k);
          R.mixed[((l * n + i) * n + j) * n + k] = v;
        }
  Mat g = M.metric_at(x);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = 0.0;
          for (int m = 0; m < n; ++m) v += g(l, m) * R.mixed[((m * n + i) * n + j) * n + k];
          R.lowered[((i * n + j) * n + k) * n + l] = v;
        }
  return R;
}

Vec covariant_derivative(const ChartManifold& M, const VectorField& Z, const Vec& X, const Vec& x) {
  check_metric(M, x);
  auto xs = kernels::to_std(x);
  auto Xs = kernels::to_std(X);
  auto gam = christoffel_values(M, x);
  return kernels::to_eigen(
      kernels::covariant_derivative<double>(gam, Z.map(), std::span<const double>(Xs), std::span<const double>(xs)));
}

Vec second_covariant(const ChartManifold& M, const VectorField& Z, const VectorField& X, const Vec& x) {
  check_metric(M, x);
  const Vec X0 = X.at(x);
  auto xd = kernels::curve_through(x, X0);
  auto Xd = X(std::span<const D1>(xd));
  auto F = kernels::covariant_derivative<D1>(M, Z.map(), std::span<const D1>(Xd), std::span<const D1>(xd));
  Vec Fv = kernels::value_part(F);
  return kernels::derivative_part(F) + christoffel_at(M, x).contract(X0, Fv);
}

double covariant_derivative_form(const ChartManifold& M, const CovectorField& omega, const Vec& X, const Vec& Y,
                                 const Vec& x) {
  auto xs = kernels::to_std(x);
  auto Xs = kernels::to_std(X);
  std::vector<double> w, dw;
  kernels::jet(omega.map(), std::span<const double>(xs), std::span<const double>(Xs), w, dw);
  auto gam = christoffel_at(M, x);
  Vec gXY = gam.contract(X, Y);
  double s = 0.0;
  for (int j = 0; j < M.dim(); ++j) s += dw[j] * Y[j] - w[j] * gXY[j];
  return s;
}

double directional_derivative(const ScalarField& f, const Vec& X, const Vec& x) {
  auto xs = kernels::to_std(x);
  auto Xs = kernels::to_std(X);
  std::vector<double> v, dv;
  kernels::jet(f.map(), std::span<const double>(xs), std::span<const double>(Xs), v, dv);
  return dv[0];
}

VectorField geodesic_extension(const ChartManifold& M, const Vec& x0, const Vec& X) {
  const int n = M.dim();
  auto gam = christoffel_at(M, x0);
  // Linear part L^k_j = Γ^k_ij X^i.
  std::vector<double> L(static_cast<std::size_t>(n * n), 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) L[k * n + j] += gam(k, i, j) * X[i];
  auto base = kernels::to_std(X);
  auto origin = kernels::to_std(x0);
  return VectorField::from(n, [n, L, base, origin](auto y, auto out) {
    for (int k = 0; k < n; ++k) {
      out[k] = base[k];
      for (int j = 0; j < n; ++j) out[k] = out[k] - L[k * n + j] * (y[j] - origin[j]);
    }
  });
}

double inner(const Mat& g, const Vec& a, const Vec& b) { return a.dot(g * b); }

std::string_view to_string(FieldClass c) {
  switch (c) {
    case FieldClass::parallel: return "parallel";
    case FieldClass::concircular: return "concircular";
    case FieldClass::recurrent: return "recurrent";
    case FieldClass::torse_forming: return "torse_forming";
    case FieldClass::generic: return "generic";
  }
  return "generic";
}

Classification classify_field(const ChartManifold& M, const VectorField& u, const std::vector<FieldSample>& samples,
                              ClassifyTolerances tol) {
  const int n = M.dim();
  std::vector<std::pair<Vec, std::vector<Vec>>> groups;
  for (const auto& s : samples) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == s.x; });
    if (it == groups.end()) groups.push_back({s.x, {s.X}});
    else it->second.push_back(s.X);
  }

  Classification out;
  bool alpha_zero = true;
  bool rho_zero = true;
  for (const auto& [x, dirs] : groups) {
    const Vec uval = u.at(x);
    const Mat g = M.metric_at(x);
    PointFit fit;
    fit.x = x;
    fit.ambiguous = std::sqrt(std::max(0.0, inner(g, uval, uval))) < 1e-8;
    const int cols = fit.ambiguous ? 1 : n + 1;
    const auto rows = static_cast<Eigen::Index>(dirs.size()) * n;
    Mat A = Mat::Zero(rows, cols);
    Vec b(rows);
    for (std::size_t s = 0; s < dirs.size(); ++s) {
      const Vec& X = dirs[s];
      const Vec du = covariant_derivative(M, u, X, x);
      for (int k = 0; k < n; ++k) {
        const auto r = static_cast<Eigen::Index>(s) * n + k;
        A(r, 0) = X[k];
        if (!fit.ambiguous)
          for (int i = 0; i < n; ++i) A(r, 1 + i) = X[i] * uval[k];
        b[r] = du[k];
      }
    }
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    if (svd.rank() < cols)
      throw Error(ErrorCode::RankDeficiency, "not enough independent directions to classify the field");
    Vec c = svd.solve(b);
    fit.alpha = c[0];
    fit.rho = fit.ambiguous ? Vec::Constant(n, std::numeric_limits<double>::quiet_NaN()) : Vec(c.tail(n));
    fit.residual = (A * c - b).lpNorm<Eigen::Infinity>() / (1.0 + b.lpNorm<Eigen::Infinity>());
    out.max_residual = std::max(out.max_residual, fit.residual);
    out.ambiguous = out.ambiguous || fit.ambiguous;
    alpha_zero = alpha_zero && std::abs(fit.alpha) <= tol.zero;
    if (!fit.ambiguous) rho_zero = rho_zero && fit.rho.lpNorm<Eigen::Infinity>() <= tol.zero;
    out.points.push_back(std::move(fit));
  }

  if (out.max_residual > tol.residual) out.kind = FieldClass::generic;
  else if (alpha_zero && rho_zero) out.kind = FieldClass::parallel;
  else if (rho_zero) out.kind = FieldClass::concircular;
  else if (alpha_zero) out.kind = FieldClass::recurrent;
  else out.kind = FieldClass::torse_forming;
  return out;
}

Classification classify_field(const ChartManifold& M, const VectorField& u, const std::vector<Vec>& points,
                              ClassifyTolerances tol) {
  std::vector<FieldSample> samples;
  for (const auto& x : points)
    for (int i = 0; i < M.dim(); ++i) samples.push_back({x, Vec::Unit(M.dim(), i)});
  return classify_field(M, u, samples, tol);
}

std::vector<Vec> sample_points(const ChartManifold& M, const SamplingConfig& cfg,
                               const std::function<bool(const Vec&)>& accept) {
  const int n = M.dim();
  const Box& box = M.sampling_box();
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::uniform_real_distribution<double>> dist;
  for (int i = 0; i < n; ++i) dist.emplace_back(box.lower[i], box.upper[i]);

  auto interior = [&](const Vec& x) {
    if (!M.contains(x)) return false;
    for (int i = 0; i < n; ++i) {
      Vec y = x;
      y[i] += cfg.boundary_margin;
      if (!M.contains(y)) return false;
      y[i] -= 2.0 * cfg.boundary_margin;
      if (!M.contains(y)) return false;
    }
    return true;
  };

  std::vector<Vec> pts;
  const std::size_t max_attempts = 10000 * std::max<std::size_t>(cfg.n_points, 1);
  for (std::size_t attempt = 0; pts.size() < cfg.n_points && attempt < max_attempts; ++attempt) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = dist[i](rng);
    if (interior(x) && (!accept || accept(x))) pts.push_back(x);
  }
  if (pts.size() < cfg.n_points)
    throw Error(ErrorCode::OutOfDomain, "could not draw " + std::to_string(cfg.n_points) + " sample points on " +
                                            M.name() + " satisfying the sampling filters");
  return pts;
}

namespace manifolds {

namespace {
Box cube(int n, double lo, double hi) { return Box{Vec::Constant(n, lo), Vec::Constant(n, hi)}; }

SmoothMap identity_metric(int n) {
  return SmoothMap(n, n * n, [n](auto, auto g) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g[i * n + j] = i == j ? 1.0 : 0.0;
  });
}
}  // namespace

ChartManifold euclidean(int n) {
  return ChartManifold("euclidean" + std::to_string(n), n, identity_metric(n), [](const Vec&) { return true; },
                       cube(n, -1.0, 1.0));
}

ChartManifold flat_torus(int n) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return ChartManifold(
      "flat_torus" + std::to_string(n), n, identity_metric(n),
      [](const Vec& x) { return (x.array() > 0.0).all() && (x.array() < 2.0 * std::numbers::pi).all(); },
      cube(n, 0.0, two_pi));
}

ChartManifold sphere2() {
  constexpr double pi = std::numbers::pi;
  SmoothMap g(2, 4, [](auto x, auto out) {
    using std::sin;
    auto s = sin(x[0]);
    out[0] = 1.0;
    out[1] = 0.0;
    out[3] = s * s;
  });
  return ChartManifold(
      "sphere2", 2, g,
      [](const Vec& x) { return x[0] > 0.2 && x[0] < std::numbers::pi - 0.2 && std::abs(x[1]) < std::numbers::pi; },
      Box{Vec{{0.2, -pi}}, Vec{{pi - 0.2, pi}}});
}

ChartManifold poincare_half_plane() {
  SmoothMap g(2, 4, [](auto x, auto out) {
    auto w = 1.0 / (x[1] * x[1]);
    out[0] = w;
    out[1] = 0.0;
    out[3] = w;
  });
  return ChartManifold("poincare_half_plane", 2, g, [](const Vec& x) { return x[1] > 0.0; },
                       Box{Vec{{-1.0, 0.0}}, Vec{{1.0, 2.0}}});
}

ChartManifold perturbed(int n, double eps) {
  if (n < 2) throw Error(ErrorCode::Unsupported, "perturbed metric needs dimension >= 2");
  SmoothMap g(n, n * n, [n, eps](auto x, auto out) {
    auto p = eps * x[0] * x[1];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = (i == j ? 1.0 : 0.0) + p;
  });
  return ChartManifold(
      "perturbed" + std::to_string(n), n, g,
      [n, eps](const Vec& x) { return (x.array().abs() < 2.0).all() && 1.0 + n * eps * x[0] * x[1] > 0.1; },
      cube(n, -1.0, 1.0));
}

ChartManifold sphere_times_line() {
  constexpr double pi = std::numbers::pi;
  SmoothMap g(3, 9, [](auto x, auto out) {
    using std::sin;
    auto s = sin(x[0]);
    for (int k = 0; k < 9; ++k) out[k] = 0.0;
    out[0] = 1.0;
    out[4] = s * s;
    out[8] = 1.0;
  });
  return ChartManifold(
      "sphere_times_line", 3, g,
      [](const Vec& x) { return x[0] > 0.2 && x[0] < std::numbers::pi - 0.2 && std::abs(x[1]) < std::numbers::pi; },
      Box{Vec{{0.2, -pi, -1.0}}, Vec{{pi - 0.2, pi, 1.0}}});
}

ChartManifold cone_over_flat_torus() {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  SmoothMap g(3, 9, [](auto x, auto out) {
    auto r2 = x[0] * x[0];
    for (int k = 0; k < 9; ++k) out[k] = 0.0;
    out[0] = 1.0;
    out[4] = r2;
    out[8] = r2;
  });
  return ChartManifold("cone_over_flat_torus", 3, g, [](const Vec& x) { return x[0] > 0.0; },
                       Box{Vec{{0.5, 0.0, 0.0}}, Vec{{2.0, two_pi, two_pi}}});
}

ChartManifold by_name(const std::string& name) {
  auto dim_suffix = [&](const std::string& prefix) -> int {
    if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) return 0;
    const std::string rest = name.substr(prefix.size());
    if (!std::all_of(rest.begin(), rest.end(), [](char c) { return c >= '0' && c <= '9'; })) return 0;
    return std::stoi(rest);
  };
  if (int n = dim_suffix("euclidean"); n > 0) return euclidean(n);
  if (int n = dim_suffix("flat_torus"); n > 0) return flat_torus(n);
  if (int n = dim_suffix("perturbed"); n > 1) return perturbed(n);
  if (name == "sphere2") return sphere2();
  if (name == "poincare_half_plane") return poincare_half_plane();
  if (name == "sphere_times_line") return sphere_times_line();
  if (name == "cone_over_flat_torus") return cone_over_flat_torus();
  throw Error(ErrorCode::UnknownPreset, "unknown manifold '" + name + "'");
}

std::vector<std::string> names() {
  return {"euclidean2", "euclidean3", "flat_torus2", "flat_torus3", "sphere2", "poincare_half_plane",
          "perturbed2", "perturbed3", "sphere_times_line", "cone_over_flat_torus"};
}

}  // namespace manifolds

}  // namespace gnb
