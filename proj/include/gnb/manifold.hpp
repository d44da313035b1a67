#pragma once

// Chart-based Riemannian manifolds: metric, Levi-Civita connection,
// curvature, covariant derivatives and vector-field classification.
//
// Curvature convention: R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z and
// R(X,Y,Z,W) = g(R(X,Y)Z, W).

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gnb/smooth_map.hpp"

namespace gnb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class DiffMode { forward_dual, central_difference };

struct Box {
  Vec lower;
  Vec upper;
};

class ChartManifold {
 public:
  using DomainPredicate = std::function<bool(const Vec&)>;

  /// `metric` maps n chart coordinates to n*n row-major components; only the
  /// upper triangle is read, the lower one is mirrored from it.
  ChartManifold(std::string name, int dim, SmoothMap metric, DomainPredicate domain, Box sampling_box);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  DiffMode diff_mode() const { return mode_; }
  ChartManifold with_diff_mode(DiffMode mode) const;

  bool contains(const Vec& x) const { return domain_(x); }
  const Box& sampling_box() const { return box_; }

  template <class T>
  std::vector<T> metric(std::span<const T> x) const {
    std::vector<T> g = metric_(x);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < i; ++j) g[i * dim_ + j] = g[j * dim_ + i];
    return g;
  }

  Mat metric_at(const Vec& x) const;

 private:
  std::string name_;
  int dim_;
  SmoothMap metric_;
  DomainPredicate domain_;
  Box box_;
  DiffMode mode_ = DiffMode::forward_dual;
};

namespace detail {
template <class Tag>
class FieldBase {
 public:
  FieldBase() = default;
  explicit FieldBase(SmoothMap map) : map_(std::move(map)) {}

  template <class F>
  static Tag from(int dim, F f) { return Tag(SmoothMap(dim, Tag::out_dim(dim), f)); }

  int dim() const { return map_.in_dim(); }
  const SmoothMap& map() const { return map_; }

  template <class T>
  std::vector<T> operator()(std::span<const T> x) const { return map_(x); }

 protected:
  SmoothMap map_;
};
}  // namespace detail

/// Smooth vector field: chart coordinates -> n contravariant components.
class VectorField : public detail::FieldBase<VectorField> {
 public:
  using FieldBase::FieldBase;
  static int out_dim(int n) { return n; }
  static VectorField constant(const Vec& v);
  Vec at(const Vec& x) const;
};

/// Smooth 1-form: chart coordinates -> n covariant components.
class CovectorField : public detail::FieldBase<CovectorField> {
 public:
  using FieldBase::FieldBase;
  static int out_dim(int n) { return n; }
  static CovectorField constant(const Vec& v);
  Vec at(const Vec& x) const;
};

class ScalarField : public detail::FieldBase<ScalarField> {
 public:
  using FieldBase::FieldBase;
  static int out_dim(int) { return 1; }
  static ScalarField constant(int dim, double c);
  double at(const Vec& x) const;
};

/// Levi-Civita symbols Γ^k_ij at one point, stored [k][i][j].
struct Christoffel {
  int n = 0;
  std::vector<double> values;

  double operator()(int k, int i, int j) const { return values[(k * n + i) * n + j]; }
  /// Γ^k_ij X^i Y^j
  Vec contract(const Vec& X, const Vec& Y) const;
};

struct CurvatureAtPoint {
  int n = 0;
  std::vector<double> mixed;    // R^l_ijk with R(∂_i,∂_j)∂_k = R^l_ijk ∂_l, stored [l][i][j][k]
  std::vector<double> lowered;  // R_ijkl = g(R(∂_i,∂_j)∂_k, ∂_l), stored [i][j][k][l]

  double operator()(int i, int j, int k, int l) const { return lowered[((i * n + j) * n + k) * n + l]; }
  /// The vector R(X,Y)Z.
  Vec apply(const Vec& X, const Vec& Y, const Vec& Z) const;
  /// R(X,Y,Z,W) = g(R(X,Y)Z, W).
  double eval(const Vec& X, const Vec& Y, const Vec& Z, const Vec& W) const;
};

/// Condition-number limit above which a metric matrix counts as singular.
inline constexpr double kSingularCondition = 1e12;

Christoffel christoffel_at(const ChartManifold& M, const Vec& x);
CurvatureAtPoint riemann_at(const ChartManifold& M, const Vec& x);

/// (∇_X Z)(x) for a tangent vector X at x.
Vec covariant_derivative(const ChartManifold& M, const VectorField& Z, const Vec& X, const Vec& x);

/// (∇_X(∇_X Z))(x) with X extended as the given field; the inner ∇_X Z is
/// differentiated as a field.
Vec second_covariant(const ChartManifold& M, const VectorField& Z, const VectorField& X, const Vec& x);

/// (∇_X ω)(Y) for a 1-form ω.
double covariant_derivative_form(const ChartManifold& M, const CovectorField& omega, const Vec& X, const Vec& Y,
                                 const Vec& x);

/// Directional derivative X(f) at x.
double directional_derivative(const ScalarField& f, const Vec& X, const Vec& x);

/// Affine extension of X with (∇_X X)(x0) = 0: X(y) = X − Γ_{x0}(X, y − x0).
VectorField geodesic_extension(const ChartManifold& M, const Vec& x0, const Vec& X);

double inner(const Mat& g, const Vec& a, const Vec& b);

// ---------------------------------------------------------------------------
// Field classification: fits ∇_X u = ρ(X) u + α X at each sample point.

enum class FieldClass { parallel, concircular, recurrent, torse_forming, generic };

std::string_view to_string(FieldClass c);

struct FieldSample {
  Vec x;
  Vec X;
};

struct PointFit {
  Vec x;
  double alpha = 0.0;
  Vec rho;              // NaN components when u(x) ≈ 0
  double residual = 0.0;
  bool ambiguous = false;  // u(x) ≈ 0: the u and X directions cannot be separated
};

struct Classification {
  FieldClass kind = FieldClass::generic;
  std::vector<PointFit> points;
  bool ambiguous = false;
  double max_residual = 0.0;
};

struct ClassifyTolerances {
  double residual = 1e-6;  // relative least-squares residual
  double zero = 1e-7;      // |α|, |ρ| below this count as zero
};

/// Samples sharing the same base point are fitted together; each point needs
/// enough directions for the (n+1)-unknown least-squares system to have full rank.
Classification classify_field(const ChartManifold& M, const VectorField& u, const std::vector<FieldSample>& samples,
                              ClassifyTolerances tol = {});

/// Convenience overload: every coordinate direction at every point.
Classification classify_field(const ChartManifold& M, const VectorField& u, const std::vector<Vec>& points,
                              ClassifyTolerances tol = {});

// ---------------------------------------------------------------------------
// Sampling

struct SamplingConfig {
  std::size_t n_points = 20;
  std::uint64_t seed = 7;
  double boundary_margin = 0.1;
};

/// Rejection sampling inside the manifold's sampling box. A point is kept when
/// the domain predicate holds at x and at x ± margin·e_i, and `accept` (if set)
/// holds at x. Deterministic for a given seed.
std::vector<Vec> sample_points(const ChartManifold& M, const SamplingConfig& cfg,
                               const std::function<bool(const Vec&)>& accept = {});

// ---------------------------------------------------------------------------
// Built-in charts

namespace manifolds {
ChartManifold euclidean(int n);
ChartManifold flat_torus(int n);
/// Unit sphere in (θ, φ), θ ∈ (0.2, π − 0.2).
ChartManifold sphere2();
ChartManifold poincare_half_plane();
/// g_ij = δ_ij + ε x¹x² on every component.
ChartManifold perturbed(int n, double eps = 0.1);
/// S² × R in (θ, φ, z): curved and carries the parallel field ∂_z.
ChartManifold sphere_times_line();
/// Cone dr² + r²(da² + db²) over a flat torus: curved, with the concircular
/// field r∂_r (α = 1).
ChartManifold cone_over_flat_torus();

ChartManifold by_name(const std::string& name);
std::vector<std::string> names();
}  // namespace manifolds

}  // namespace gnb
