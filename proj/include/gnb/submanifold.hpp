#pragma once

// The graph u(M) = {(p, u(p))} ⊂ (TM, G) of a vector field u.
//
// Two independent routes to the second fundamental form are provided:
//   * closed forms in base-manifold terms (lifted_derivative_form, the T_W/T_V
//     family, constant_length_converse);
//   * a brute-force route that differentiates G numerically
//     (connection_pairing_oracle, sff_oracle).
// totally_geodesic_test runs both over sample points and compares them.
//
// Field arguments (W, V, X, Y) are extended as the given fields; the
// verification sweep uses coordinate-constant extensions throughout.

#include <functional>
#include <string>
#include <vector>

#include "gnb/gnatural.hpp"
#include "gnb/manifold.hpp"
#include "gnb/parallel.hpp"
#include "gnb/tangent_bundle.hpp"

namespace gnb {

/// u∗(X) = Xʰ + (∇_X u)ᵛ
BundleVector pushforward(const ChartManifold& M, const VectorField& u, const Vec& X, const Vec& p);

struct GraphPointFrame {
  Vec p;
  TangentPoint z;
  std::vector<BundleVector> tangent_basis;  // u∗(e_i)
  std::vector<BundleVector> normal_basis;
  Mat tangent_coords;  // 2n × n, columns in TM coordinates
  Mat normal_coords;   // 2n × n
  Mat G;  // bundle metric in TM coordinates at z
  BundleChristoffel connection;

  /// max |G(normal_j, tangent_i)|
  double orthogonality_residual() const;
};

/// Builds tangent and normal frames at (p, u(p)). The normal basis spans the
/// kernel of η ↦ G(η, u∗(e_i)); throws RankDeficiency if that kernel is not
/// n-dimensional.
GraphPointFrame graph_frame(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p);

std::vector<BundleVector> normal_basis(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                       const Vec& p);

/// Left side of the normality condition for (Wʰ + Vᵛ) against u∗(X):
/// g(AW + Bg(u,W)u + a2V + b2g(u,V)u, X) + g(a1V + b1g(u,V)u + a2W + b2g(u,W)u, ∇_X u).
double normality_condition(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p,
                           const Vec& W, const Vec& V, const Vec& X);

/// Oracle: G(∇̃_{u∗X}(Wʰ + Vᵛ), u∗X) along s ↦ (p + sX, u(p + sX)).
double connection_pairing_oracle(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p,
                                 const Vec& X, const VectorField& W, const VectorField& V);
double connection_pairing_oracle(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                 const GraphPointFrame& frame, const Vec& X, const VectorField& W,
                                 const VectorField& V);

struct SffResult {
  BundleVector normal_part;   // II(u∗X, u∗Y)
  Vec pairings;               // G(∇̃_{u∗X} u∗Y, η_k) for the frame's normal basis
  Vec coefficients;           // II = Σ coefficients_k η_k
  double norm = 0.0;          // ‖II‖ in a G-pseudo-orthonormal normal frame
};

/// Oracle: normal component of ∇̃_{u∗X}(u∗Y).
SffResult sff_oracle(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p,
                     const Vec& X, const VectorField& Y);
SffResult sff_oracle(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                     const GraphPointFrame& frame, const Vec& X, const VectorField& Y);

/// Closed form for G(∇̃_{u∗X}(Wʰ + Vᵛ), u∗X) in base-manifold terms: curvature
/// terms, the ∇_X W / ∇_X V block and the block of generator derivatives.
double lifted_derivative_form(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p,
                              const Vec& X, const VectorField& W, const VectorField& V);

struct TwTv {
  Vec tw;
  Vec tv;
};

/// T_W(X,u), T_V(X,u) with X extended as the given field. For normal
/// (Wʰ + Vᵛ): g(W,T_W) + g(V,T_V) = G(II(u∗X,u∗X), Wʰ + Vᵛ).
TwTv tw_tv_general(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u, const Vec& p,
                   const VectorField& X);

/// Closed form for a concircular field ∇_X u = αX. Assumes (∇_X X)(p) = 0.
/// Throws NotConcircular if u does not satisfy ∇u = α·id at p.
TwTv tw_tv_concircular(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                       const ScalarField& alpha, const Vec& p, const VectorField& X);

/// Closed form for a recurrent field ∇_X u = ρ(X)u, with ρ² read as ρ(X)².
/// Assumes (∇_X X)(p) = 0. Throws NotRecurrent if u does not satisfy it at p.
TwTv tw_tv_recurrent(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                     const CovectorField& rho, const Vec& p, const VectorField& X);

/// Normality condition specialised to a torse-forming field ∇_X u = ρ(X)u + αX:
/// g(W, (A+αa2)X + (B+αb2)g(u,X)u + ρ(X)F2u) + g(V, (a2+αa1)X + (b2+αb1)g(u,X)u + ρ(X)F1u).
double torse_forming_normality(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                               const CovectorField& rho, const ScalarField& alpha, const Vec& p, const Vec& W,
                               const Vec& V, const Vec& X);
/// max over coordinate directions X of |torse_forming_normality|; zero iff Wʰ + Vᵛ is normal.
double torse_forming_normality_residual(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                        const CovectorField& rho, const ScalarField& alpha, const Vec& p,
                                        const Vec& W, const Vec& V);

/// −G(A_τ u∗X, u∗X) for τ = (F1+F3)uᵛ − F2uʰ, valid where g(u, ∇_X u) = 0.
/// Throws NotConstantLength otherwise.
double constant_length_converse(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                const Vec& p, const Vec& X);
/// The same scalar from the connection oracle with τ extended as a field.
double constant_length_converse_oracle(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                       const Vec& p, const Vec& X);

/// y ↦ G-orthogonal projection of the constant lift W0ʰ + V0ᵛ onto the normal
/// space of u(M) at (y, u(y)).
std::function<BundleVector(const Vec&)> projected_normal_field(const ChartManifold& M, const GeneratorSet& gen,
                                                               const VectorField& u, const Vec& W0, const Vec& V0);

// ---------------------------------------------------------------------------
// Verification sweep

struct VerificationTolerances {
  double sff = 1e-6;            // ‖II‖ below this counts as zero
  double oracle = 1e-5;         // |closed − oracle| ≤ oracle·(1 + |closed|)
  double ledger = 1e-5;         // g(W,T_W) + g(V,T_V) against G(II, η), relative
  double orthogonality = 1e-9;  // normal ⟂ tangent
};

struct SampleRecord {
  std::size_t index = 0;
  Vec p;
  double t = 0.0;
  double sff_norm = 0.0;        // max over coordinate pairs (i, j)
  double sff_symmetry = 0.0;    // max |G(II(e_i,e_j) − II(e_j,e_i), η_k)|
  double closed_form_residual = 0.0;   // max relative closed-vs-oracle residual
  double ledger_residual = 0.0;  // relative
  double tw_norm = 0.0;         // max g-norm over coordinate X, (∇_X X)(p) = 0 extension
  double tv_norm = 0.0;
  double orthogonality = 0.0;
  std::string error;            // non-empty when the sample could not be evaluated
};

struct VerificationReport {
  std::vector<SampleRecord> records;  // in sample order
  double max_sff = 0.0;
  double max_symmetry = 0.0;
  double max_closed_form_residual = 0.0;
  double max_ledger_residual = 0.0;
  double max_orthogonality = 0.0;
  std::size_t failed_samples = 0;
  bool totally_geodesic = false;
  bool oracle_agrees = false;
  bool ledger_holds = false;
  bool frames_orthogonal = false;
};

VerificationReport totally_geodesic_test(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                         const std::vector<Vec>& points, const VerificationTolerances& tol = {},
                                         Execution exec = Execution::parallel);

/// Draws points with t = g(u,u) inside both the generator domain and [t_min, t_max].
std::vector<Vec> sample_graph_points(const ChartManifold& M, const GeneratorSet& gen, const VectorField& u,
                                     const SamplingConfig& cfg, double t_min = 0.0,
                                     double t_max = std::numeric_limits<double>::infinity());

}  // namespace gnb
