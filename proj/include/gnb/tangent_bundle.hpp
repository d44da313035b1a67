#pragma once

// Geometry of TM in induced coordinates (x^i, u^i): horizontal and vertical
// lifts, the connection map K, the g-natural metric G and a brute-force
// Levi-Civita connection of G obtained by differentiating G numerically.
//
// Coordinate basis vs. lifts: ∂_i = e_iʰ + u^r Γ^j_ri e_jᵛ and δ_i = e_iᵛ.

#include <functional>

#include "gnb/gnatural.hpp"
#include "gnb/manifold.hpp"

namespace gnb {

struct TangentPoint {
  Vec x;
  Vec u;

  Vec coords() const;
  static TangentPoint from_coords(const Vec& z);
};

/// A vector of T_zTM in the split H ⊕ V: hor = dπ(W), ver = K(W).
struct BundleVector {
  Vec hor;
  Vec ver;

  static BundleVector zero(int n) { return {Vec::Zero(n), Vec::Zero(n)}; }
};

/// Xʰ in TM coordinates: (X, −u^r X^s Γ^j_rs).
Vec horizontal_lift(const ChartManifold& M, const Vec& X, const TangentPoint& z);
/// Xᵛ in TM coordinates: (0, X).
Vec vertical_lift(const Vec& X);

/// (dπ(W), K(W)) for a 2n coordinate vector W.
BundleVector split(const ChartManifold& M, const Vec& W, const TangentPoint& z);
/// Inverse of split: hor ʰ + ver ᵛ in TM coordinates.
Vec assemble(const ChartManifold& M, const BundleVector& P, const TangentPoint& z);

/// G_z(P, Q) from the three lift formulas. For dim M = 1 the b_j terms are dropped.
double bundle_metric(const ChartManifold& M, const GeneratorSet& gen, const TangentPoint& z, const BundleVector& P,
                     const BundleVector& Q);

/// 2n × 2n matrix of G in TM coordinates.
Mat bundle_metric_matrix(const ChartManifold& M, const GeneratorSet& gen, const TangentPoint& z);

/// Levi-Civita symbols of G on the 2n coordinates, stored [a][b][c].
struct BundleChristoffel {
  int dim = 0;  // 2n
  std::vector<double> values;

  double operator()(int a, int b, int c) const { return values[(a * dim + b) * dim + c]; }
  /// Γ̃^a_bc P^b Q^c
  Vec contract(const Vec& P, const Vec& Q) const;
};

/// Central differences of G in all 2n directions with base step 1e−5·max(1,|coordinate|),
/// refined by one Richardson extrapolation step.
/// Throws SingularMetric when cond(G) exceeds 1e12.
BundleChristoffel bundle_christoffel(const ChartManifold& M, const GeneratorSet& gen, const TangentPoint& z);

using BundleCurve = std::function<Vec(double)>;

/// (DV/ds)^a = dV^a/ds + Γ̃^a_bc ċ^b V^c at parameter s; derivatives in s by
/// Richardson-refined central differences.
Vec covariant_derivative_along(const ChartManifold& M, const GeneratorSet& gen, const BundleCurve& c,
                               const BundleCurve& V, double s);

}  // namespace gnb
