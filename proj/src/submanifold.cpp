#include "gnb/submanifold.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"

namespace gnb {

namespace {

constexpr double kCurveStep = 1e-5;
constexpr double kStructureTol = 1e-6;
constexpr double kConstantLengthTol = 1e-8;

// In dimension one the b_j terms of G are dropped; the closed forms follow suit.
GeneratorValues effective_values(const GeneratorSet& gen, double t, int n) {
  GeneratorValues v = values_at(gen, t);
  if (n == 1) v.b1 = v.b2 = v.b3 = v.db1 = v.db2 = v.db3 = 0.0;
  return v;
}

struct Local {
  Mat g;
  Vec u;
  double t;
  GeneratorValues v;
  double A, B, dA, dB;

  double ip(const Vec& a, const Vec& b) const { return a.dot(g * b); }
};

Local local_at(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p) {
  Local L;
  L.g = M.metric_at(p);
  L.u = u.at(p);
  L.t = L.ip(L.u, L.u);
  L.v = effective_values(gen, L.t, M.dim());
  L.A = L.v.a1 + L.v.a3;
  L.B = L.v.b1 + L.v.b3;
  L.dA = L.v.da1 + L.v.da3;
  L.dB = L.v.db1 + L.v.db3;
  return L;
}

TangentPoint graph_point(const VectorField& u, const Vec& y) { return {y, u.at(y)}; }

Vec pushforward_coords(const ChartManifold& M, const VectorField& u, const Vec& X, const Vec& y) {
  return assemble(M, pushforward(M, u, X, y), graph_point(u, y));
}

// dV/ds at s = 0 for s ↦ V(p + sX).
template <class F>
Vec curve_derivative(const Vec& p, const Vec& X, F&& V) {
  return kernels::richardson_derivative([&](double d) { return Vec(V(Vec(p + d * X))); }, kCurveStep);
}

Vec normal_pairings(const GraphPointFrame& f, const Vec& D) { return f.normal_coords.transpose() * (f.G * D); }

void fill_sff(const GraphPointFrame& f, const ChartManifold& M, SffResult& r) {
  const Mat N = f.normal_coords.transpose() * f.G * f.normal_coords;
  Eigen::SelfAdjointEigenSolver<Mat> es(N);
  const Vec& lam = es.eigenvalues();
  const double scale = lam.cwiseAbs().maxCoeff();
  if (!(lam.cwiseAbs().minCoeff() > 1e-14 * scale))
    throw Error(ErrorCode::RankDeficiency, "normal space is degenerate for G");
  const Vec q = es.eigenvectors().transpose() * r.pairings;
  double s = 0.0;
  Vec w(q.size());
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    s += q[k] * q[k] / std::abs(lam[k]);
    w[k] = q[k] / lam[k];
  }
  r.norm = std::sqrt(s);
  r.coefficients = es.eigenvectors() * w;
  r.normal_part = split(M, Vec(f.normal_coords * r.coefficients), f.z);
}

void check_structure(const Vec& lhs, const Vec& rhs, double scale, ErrorCode code, const char* what) {
  if ((lhs - rhs).norm() > kStructureTol * (1.0 + scale)) throw Error(code, what);
}

}  // namespace

BundleVector pushforward(const ChartManifold& M, const VectorField& u, const Vec& X, const Vec& p) {
  return {X, covariant_derivative(M, u, X, p)};
}

double GraphPointFrame::orthogonality_residual() const {
  return (normal_coords.transpose() * G * tangent_coords).cwiseAbs().maxCoeff();
}

GraphPointFrame graph_frame(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p) {
  const int n = M.dim();
  GraphPointFrame f;
  f.p = p;
  f.z = graph_point(u, p);
  f.G = bundle_metric_matrix(M, gen, f.z);
  f.connection = bundle_christoffel(M, gen, f.z);

  f.tangent_coords.resize(2 * n, n);
  for (int i = 0; i < n; ++i) {
    f.tangent_basis.push_back(pushforward(M, u, Vec::Unit(n, i), p));
    f.tangent_coords.col(i) = assemble(M, f.tangent_basis.back(), f.z);
  }

  const Mat rows = f.tangent_coords.transpose() * f.G;  // n × 2n
  Eigen::JacobiSVD<Mat> svd(rows, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv[n - 1] > 1e-10 * sv[0]))
    throw Error(ErrorCode::RankDeficiency, "tangent space of the graph is degenerate for G");
  f.normal_coords = svd.matrixV().rightCols(n);
  for (int k = 0; k < n; ++k) f.normal_basis.push_back(split(M, f.normal_coords.col(k), f.z));
  return f;
}

std::vector<BundleVector> normal_basis(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                       const Vec& p) {
  return graph_frame(M, gen, u, p).normal_basis;
}

double normality_condition(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p,
                           const Vec& W, const Vec& V, const Vec& X) {
  const Local L = local_at(M, gen, u, p);
  const Vec Du = covariant_derivative(M, u, X, p);
  const double uW = L.ip(L.u, W), uV = L.ip(L.u, V);
  const Vec hor = L.A * W + L.B * uW * L.u + L.v.a2 * V + L.v.b2 * uV * L.u;
  const Vec ver = L.v.a1 * V + L.v.b1 * uV * L.u + L.v.a2 * W + L.v.b2 * uW * L.u;
  return L.ip(hor, X) + L.ip(ver, Du);
}

double connection_pairing_oracle(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p,
                                 const Vec& X, const VectorField& W, const VectorField& V) {
  return connection_pairing_oracle(M, gen, u, graph_frame(M, gen, u, p), X, W, V);
}

double connection_pairing_oracle(const ChartManifold& M, const GeneratorSet&, const VectorField& u,
                                 const GraphPointFrame& frame, const Vec& X, const VectorField& W,
                                 const VectorField& V) {
  auto eta = [&](const Vec& y) { return assemble(M, {W.at(y), V.at(y)}, graph_point(u, y)); };
  const Vec cdot = pushforward_coords(M, u, X, frame.p);
  const Vec D = curve_derivative(frame.p, X, eta) + frame.connection.contract(cdot, eta(frame.p));
  return D.dot(frame.G * cdot);
}

SffResult sff_oracle(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p,
                     const Vec& X, const VectorField& Y) {
  return sff_oracle(M, gen, u, graph_frame(M, gen, u, p), X, Y);
}

SffResult sff_oracle(const ChartManifold& M, const GeneratorSet&, const VectorField& u, const GraphPointFrame& frame,
                     const Vec& X, const VectorField& Y) {
  auto field = [&](const Vec& y) { return pushforward_coords(M, u, Y.at(y), y); };
  const Vec cdot = pushforward_coords(M, u, X, frame.p);
  const Vec D = curve_derivative(frame.p, X, field) + frame.connection.contract(cdot, field(frame.p));
  SffResult r;
  r.pairings = normal_pairings(frame, D);
  fill_sff(frame, M, r);
  return r;
}

double lifted_derivative_form(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p,
                              const Vec& X, const VectorField& W, const VectorField& V) {
  const Local L = local_at(M, gen, u, p);
  const auto& v = L.v;
  const auto R = riemann_at(M, p);
  const Vec& uu = L.u;
  const Vec Du = covariant_derivative(M, u, X, p);
  const Vec Wp = W.at(p), Vp = V.at(p);
  const Vec DW = covariant_derivative(M, W, X, p);
  const Vec DV = covariant_derivative(M, V, X, p);
  auto ip = [&](const Vec& a, const Vec& b) { return L.ip(a, b); };
  const double uX = ip(uu, X), uDu = ip(uu, Du), uV = ip(uu, Vp);

  double s = v.a1 * R.eval(uu, Du, Wp, X) + v.a2 * R.eval(uu, X, Wp, X);
  s += L.A * ip(X, DW) + L.B * uX * ip(uu, DW) + L.B * uX * ip(Vp, X);
  s += v.a1 * ip(Du, DV) + v.b1 * uDu * ip(Vp, Du) + v.b1 * uDu * ip(uu, DV) + v.a2 * ip(X, DV) + v.a2 * ip(Du, DW);
  s += v.b2 * (uX * ip(uu, DV) + uX * ip(Vp, Du) + uDu * ip(Vp, X) + uDu * ip(uu, DW));
  s += uV * (L.dA * ip(X, X) + L.dB * uX * uX + v.da1 * ip(Du, Du) + 2.0 * v.da2 * ip(X, Du) +
             v.db1 * uDu * uDu + 2.0 * v.db2 * uX * uDu);
  return s;
}

TwTv tw_tv_general(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p,
                   const VectorField& Xf) {
  using kernels::Vector;
  const int n = M.dim();
  const Vec X0 = Xf.at(p);

  // Every field is evaluated along y = p + εX so that X(·) is the ε-part.
  const Vector<D1> xd = kernels::curve_through(p, X0);
  const std::span<const D1> xs(xd);
  const Vector<D1> Xd = Xf(xs);
  const Vector<D1> gd = M.metric<D1>(xs);
  const Vector<D1> gam = kernels::christoffel<D1>(M, xs);
  const Vector<D1> ud = u(xs);
  const Vector<D1> Dud = kernels::covariant_derivative<D1>(gam, u.map(), std::span<const D1>(Xd), xs);

  const D1 t = kernels::inner(gd, ud, ud);
  if (!gen.domain.contains(t.val))
    throw Error(ErrorCode::OutOfDomain, "t = " + std::to_string(t.val) + " outside the domain of " + gen.name);
  const D1 zero(0.0);
  const D1 a1 = eval(gen.a1, t), a2 = eval(gen.a2, t), a3 = eval(gen.a3, t);
  const D1 b1 = n == 1 ? zero : eval(gen.b1, t), b2 = n == 1 ? zero : eval(gen.b2, t),
           b3 = n == 1 ? zero : eval(gen.b3, t);
  const D1 A = a1 + a3, B = b1 + b3;
  const D1 uX = kernels::inner(gd, ud, Xd), uDu = kernels::inner(gd, ud, Dud);
  const D1 b1uDu = b1 * uDu;

  Vector<D1> FW(n), FV(n);
  for (int k = 0; k < n; ++k) {
    FW[k] = A * Xd[k] + a2 * Dud[k] + B * uX * ud[k] + b2 * uDu * ud[k];
    FV[k] = a2 * Xd[k] + a1 * Dud[k];
  }

  const Vector<double> gam0 = kernels::values(gam);
  auto nabla = [&](const Vector<D1>& F) {
    const auto c = kernels::contract(gam0, kernels::to_std(X0), kernels::values(F));
    return Vec(kernels::derivative_part(F) + kernels::to_eigen(c));
  };

  const Local L = local_at(M, gen, u, p);
  const auto& v = L.v;
  const Vec u0 = kernels::value_part(ud), Du0 = kernels::value_part(Dud);
  const auto R = riemann_at(M, p);

  TwTv out;
  out.tw = nabla(FW) + v.a1 * R.apply(u0, Du0, X0) + v.a2 * R.apply(u0, X0, X0);
  const double coef = 0.5 * b1.eps * uDu.val + L.dA * L.ip(X0, X0) + L.dB * uX.val * uX.val +
                      v.da1 * L.ip(Du0, Du0) + 2.0 * v.da2 * L.ip(X0, Du0);
  out.tv = nabla(FV) + (v.b2 * uX.eps + b1uDu.eps - coef) * u0 - (L.B * uX.val + v.b2 * uDu.val) * X0;
  return out;
}

TwTv tw_tv_concircular(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                       const ScalarField& alpha, const Vec& p, const VectorField& Xf) {
  const int n = M.dim();
  const double al = alpha.at(p);
  for (int i = 0; i < n; ++i) {
    const Vec e = Vec::Unit(n, i);
    const Vec Du = covariant_derivative(M, u, e, p);
    check_structure(Du, al * e, Du.norm(), ErrorCode::NotConcircular, "u is not concircular with the given alpha");
  }
  const Vec X = Xf.at(p);
  const Local L = local_at(M, gen, u, p);
  const auto& v = L.v;
  const double Xal = directional_derivative(alpha, X, p);
  const double uX = L.ip(L.u, X), XX = L.ip(X, X);
  auto Xt = [&](double fprime) { return 2.0 * al * fprime * uX; };  // X(f(t))

  const double XAa2 = Xt(L.dA) + Xal * v.a2 + al * Xt(v.da2);
  const double XBb2 = Xt(L.dB) + Xal * v.b2 + al * Xt(v.db2);
  const double Xa2a1 = Xt(v.da2) + Xal * v.a1 + al * Xt(v.da1);
  const double Bb2 = L.B + al * v.b2;
  const auto R = riemann_at(M, p);

  TwTv out;
  out.tw = (XAa2 + al * Bb2 * uX) * X + (v.a2 + al * v.a1) * R.apply(L.u, X, X) + (XBb2 * uX + al * Bb2 * XX) * L.u;
  out.tv = (Xa2a1 - Bb2 * uX) * X +
           ((v.b1 * Xal + 0.5 * al * Xt(v.db1)) * uX + al * (v.b2 + al * v.b1) * XX) * L.u -
           (L.dB * uX * uX + (L.dA + al * (al * v.da1 + 2.0 * v.da2)) * XX) * L.u;
  return out;
}

TwTv tw_tv_recurrent(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                     const CovectorField& rho, const Vec& p, const VectorField& Xf) {
  const int n = M.dim();
  const Vec rp = rho.at(p);
  const Vec u0 = u.at(p);
  for (int i = 0; i < n; ++i) {
    const Vec Du = covariant_derivative(M, u, Vec::Unit(n, i), p);
    check_structure(Du, rp[i] * u0, Du.norm(), ErrorCode::NotRecurrent, "u is not recurrent with the given rho");
  }
  const Vec X = Xf.at(p);
  const Local L = local_at(M, gen, u, p);
  const auto& v = L.v;
  const double t = L.t;
  const double r = rp.dot(X);
  const double sigma = covariant_derivative_form(M, rho, X, X, p) + r * r;
  const double F1 = v.a1 + t * v.b1, F2 = v.a2 + t * v.b2;
  const double uX = L.ip(L.u, X), XX = L.ip(X, X);
  const auto R = riemann_at(M, p);

  TwTv out;
  out.tw = (F2 * sigma + 2.0 * r * (L.B + L.dB * t) * uX + 2.0 * r * r * t * (v.da2 + v.b2 + v.db2 * t)) * L.u +
           2.0 * L.dA * r * t * X + v.a2 * R.apply(L.u, X, X);
  out.tv = (F1 * sigma + (v.b1 + v.da1 + v.db1 * t) * r * r * t) * L.u +
           ((2.0 * v.da2 - v.b2) * r * t - L.B * uX) * X -
           (r * (2.0 * v.da2 - v.b2) * uX + L.dA * XX + L.dB * uX * uX) * L.u;
  return out;
}

double torse_forming_normality(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                               const CovectorField& rho, const ScalarField& alpha, const Vec& p, const Vec& W,
                               const Vec& V, const Vec& X) {
  const Local L = local_at(M, gen, u, p);
  const auto& v = L.v;
  const double al = alpha.at(p);
  const double r = rho.at(p).dot(X);
  const double F1 = v.a1 + L.t * v.b1, F2 = v.a2 + L.t * v.b2;
  const double uX = L.ip(L.u, X);
  const Vec hor = (L.A + al * v.a2) * X + ((L.B + al * v.b2) * uX + r * F2) * L.u;
  const Vec ver = (v.a2 + al * v.a1) * X + ((v.b2 + al * v.b1) * uX + r * F1) * L.u;
  return L.ip(W, hor) + L.ip(V, ver);
}

double torse_forming_normality_residual(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                        const CovectorField& rho, const ScalarField& alpha, const Vec& p,
                                        const Vec& W, const Vec& V) {
  double worst = 0.0;
  for (int i = 0; i < M.dim(); ++i)
    worst = std::max(worst, std::abs(torse_forming_normality(M, gen, u, rho, alpha, p, W, V, Vec::Unit(M.dim(), i))));
  return worst;
}

double constant_length_converse(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                const Vec& p, const Vec& X) {
  const Local L = local_at(M, gen, u, p);
  const auto& v = L.v;
  const double t = L.t;
  const Vec D = covariant_derivative(M, u, X, p);
  const double uD = L.ip(L.u, D);
  if (std::abs(uD) > kConstantLengthTol * (1.0 + std::sqrt(t * L.ip(D, D))))
    throw Error(ErrorCode::NotConstantLength, "g(u, grad_X u) = " + std::to_string(uD) + " is not zero");
  const auto R = riemann_at(M, p);
  const double F1 = v.a1 + t * v.b1, F2 = v.a2 + t * v.b2, F3 = v.a3 + t * v.b3;
  const double uX = L.ip(L.u, X), XD = L.ip(X, D);
  return ((v.a1 + v.da1 * t) * (F1 + F3) - v.a2 * F2) * L.ip(D, D) -
         F2 * (v.a1 * R.eval(L.u, D, L.u, X) + v.a2 * R.eval(L.u, X, L.u, X) + L.A * XD) +
         (F1 + F3) * ((L.B + L.dB * t) * uX * uX + (v.a2 + 2.0 * v.da2 * t) * XD + L.dA * t * L.ip(X, X));
}

double constant_length_converse_oracle(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                       const Vec& p, const Vec& X) {
  const int n = M.dim();
  auto scaled = [&](bool vertical) {
    return VectorField(SmoothMap(
        n, n,
        [M, gen, u, n, vertical](std::span<const double> y, std::span<double> out) {
          const Vec yv = Eigen::Map<const Vec>(y.data(), n);
          const Vec uy = u.at(yv);
          const double t = inner(M.metric_at(yv), uy, uy);
          const GeneratorValues v = effective_values(gen, t, n);
          const double F1 = v.a1 + t * v.b1, F2 = v.a2 + t * v.b2, F3 = v.a3 + t * v.b3;
          const double c = vertical ? F1 + F3 : -F2;
          for (int k = 0; k < n; ++k) out[k] = c * uy[k];
        },
        {}, {}));
  };
  return connection_pairing_oracle(M, gen, u, p, X, scaled(false), scaled(true));
}

std::function<BundleVector(const Vec&)> projected_normal_field(const ChartManifold& M, const GeneratorSet& gen,
                                                               const VectorField& u, const Vec& W0, const Vec& V0) {
  return [M, gen, u, W0, V0](const Vec& y) {
    const int n = M.dim();
    const TangentPoint z = graph_point(u, y);
    const Mat G = bundle_metric_matrix(M, gen, z);
    Mat T(2 * n, n);
    for (int i = 0; i < n; ++i) T.col(i) = pushforward_coords(M, u, Vec::Unit(n, i), y);
    const Vec xi = assemble(M, {W0, V0}, z);
    const Mat gram = T.transpose() * G * T;
    const Vec eta = xi - T * gram.ldlt().solve(T.transpose() * (G * xi));
    return split(M, eta, z);
  };
}

// ---------------------------------------------------------------------------

namespace {

SampleRecord evaluate_sample(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p,
                             std::size_t index) {
  const int n = M.dim();
  SampleRecord rec;
  rec.index = index;
  rec.p = p;
  try {
    const Vec u0 = u.at(p);
    rec.t = inner(M.metric_at(p), u0, u0);
    const GraphPointFrame frame = graph_frame(M, gen, u, p);
    rec.orthogonality = frame.orthogonality_residual();

    std::vector<VectorField> basis;
    for (int i = 0; i < n; ++i) basis.push_back(VectorField::constant(Vec::Unit(n, i)));

    std::vector<std::vector<Vec>> pair(n, std::vector<Vec>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const SffResult s = sff_oracle(M, gen, u, frame, Vec::Unit(n, i), basis[j]);
        pair[i][j] = s.pairings;
        if (j >= i) rec.sff_norm = std::max(rec.sff_norm, s.norm);
      }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        rec.sff_symmetry = std::max(rec.sff_symmetry, (pair[i][j] - pair[j][i]).cwiseAbs().maxCoeff());

    for (int i = 0; i < n; ++i) {
      const Vec X = Vec::Unit(n, i);
      const TwTv tc = tw_tv_general(M, gen, u, p, basis[i]);
      const TwTv tg = tw_tv_general(M, gen, u, p, geodesic_extension(M, p, X));
      const Mat g = M.metric_at(p);
      rec.tw_norm = std::max(rec.tw_norm, std::sqrt(std::abs(inner(g, tg.tw, tg.tw))));
      rec.tv_norm = std::max(rec.tv_norm, std::sqrt(std::abs(inner(g, tg.tv, tg.tv))));
      for (int k = 0; k < n; ++k) {
        const BundleVector& eta = frame.normal_basis[k];
        const VectorField W = VectorField::constant(eta.hor), V = VectorField::constant(eta.ver);
        const double closed = lifted_derivative_form(M, gen, u, p, X, W, V);
        const double oracle = connection_pairing_oracle(M, gen, u, frame, X, W, V);
        rec.closed_form_residual = std::max(rec.closed_form_residual, std::abs(closed - oracle) / (1.0 + std::abs(closed)));
        const double lhs = inner(g, eta.hor, tc.tw) + inner(g, eta.ver, tc.tv);
        rec.ledger_residual =
            std::max(rec.ledger_residual, std::abs(lhs - pair[i][i][k]) / (1.0 + std::abs(pair[i][i][k])));
      }
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

VerificationReport totally_geodesic_test(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                         const std::vector<Vec>& points, const VerificationTolerances& tol,
                                         Execution exec) {
  VerificationReport rep;
  rep.records.resize(points.size());
  for_each_index(points.size(), exec,
                 [&](std::size_t i) { rep.records[i] = evaluate_sample(M, gen, u, points[i], i); });

  for (const auto& r : rep.records) {
    if (!r.error.empty()) {
      ++rep.failed_samples;
      continue;
    }
    rep.max_sff = std::max(rep.max_sff, r.sff_norm);
    rep.max_symmetry = std::max(rep.max_symmetry, r.sff_symmetry);
    rep.max_closed_form_residual = std::max(rep.max_closed_form_residual, r.closed_form_residual);
    rep.max_ledger_residual = std::max(rep.max_ledger_residual, r.ledger_residual);
    rep.max_orthogonality = std::max(rep.max_orthogonality, r.orthogonality);
  }
  const bool clean = rep.failed_samples == 0 && !points.empty();
  rep.totally_geodesic = clean && rep.max_sff < tol.sff;
  rep.oracle_agrees = clean && rep.max_closed_form_residual <= tol.oracle;
  rep.ledger_holds = clean && rep.max_ledger_residual <= tol.ledger;
  rep.frames_orthogonal = clean && rep.max_orthogonality <= tol.orthogonality;
  return rep;
}

std::vector<Vec> sample_graph_points(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                     const SamplingConfig& cfg, double t_min, double t_max) {
  return sample_points(M, cfg, [&](const Vec& x) {
    const Vec ux = u.at(x);
    const double t = inner(M.metric_at(x), ux, ux);
    return gen.domain.contains(t) && t >= t_min && t <= t_max;
  });
}

}  // namespace gnb
