#pragma once

// P1 finite elements on an interval for −(A_ε u')' + a_{0,ε} u = f with
// ε-dependent coefficients, Dirichlet data and an optional obstacle.

#include <optional>
#include <variant>
#include <vector>

#include "gennet/variational.hpp"

namespace gennet::fem {

struct Mesh1D {
  double x_left = 0.0, x_right = 1.0;
  std::size_t n_elems = 4;

  double h() const { return (x_right - x_left) / static_cast<double>(n_elems); }
  double node(std::size_t j) const { return x_left + static_cast<double>(j) * h(); }
  std::size_t n_nodes() const { return n_elems + 1; }
  std::size_t n_interior() const { return n_elems - 1; }
  void validate() const;
};

/// Normalization constant of φ(t) = Z·exp(−1/(1−t²)).
double mollifier_constant();
/// φ_ε(x − center) = φ((x − center)/ε)/ε.
double mollifier_eval(double x, double eps, double center);

struct PointMass {
  double x = 0.0, weight = 1.0;
};

/// c on [a, b].
struct DensityBlock {
  double c = 0.0, a = 0.0, b = 0.0;
};

struct ConstantCoeff {
  double value = 0.0;
};
/// 1 for x > split, coeff·ε^p for x ≤ split.
struct HeavisideNuCoeff {
  double split = 0.0;
  double p = 1.0;
  double coeff = 1.0;
};
/// Σ w_i φ_ε(x − x_i) + (ρ ∗ φ_ε)(x) with ρ a sum of constant blocks.
struct MollifiedMeasureCoeff {
  std::vector<PointMass> masses;
  std::vector<DensityBlock> density;
};
/// Nodal values per grid index, linearly interpolated.
struct TabulatedCoeff {
  std::vector<std::vector<double>> nodal;
};

using CoefficientData = std::variant<ConstantCoeff, HeavisideNuCoeff, MollifiedMeasureCoeff, TabulatedCoeff>;

class CoefficientNet {
 public:
  CoefficientNet() : data_(ConstantCoeff{}) {}
  explicit CoefficientNet(CoefficientData data) : data_(std::move(data)) {}
  static CoefficientNet constant(double v) { return CoefficientNet(ConstantCoeff{v}); }

  const CoefficientData& data() const noexcept { return data_; }
  bool is_mollified() const { return std::holds_alternative<MollifiedMeasureCoeff>(data_); }
  bool eps_independent() const;

  double eval(double x, std::size_t k, double eps, const Mesh1D& mesh) const;

 private:
  CoefficientData data_;
};

/// Mollified measure evaluated at every Gauss point of the mesh (3 per
/// element, element-major order) for grid index k.
std::vector<double> mollify_measure(const MollifiedMeasureCoeff& measure, double eps, const Mesh1D& mesh);

struct ProblemSpec {
  GridPtr grid;
  Mesh1D mesh;
  CoefficientNet diffusion = CoefficientNet::constant(1.0);
  CoefficientNet potential = CoefficientNet::constant(0.0);
  CoefficientNet rhs = CoefficientNet::constant(0.0);
  std::vector<PointMass> point_loads;
  /// Lower bound at the nodes.
  std::optional<CoefficientNet> obstacle;
  /// Boundary values at x_left / x_right, one per grid index.
  std::vector<double> g_left, g_right;

  void validate() const;
  double boundary_left(std::size_t k) const { return g_left.empty() ? 0.0 : g_left[k]; }
  double boundary_right(std::size_t k) const { return g_right.empty() ? 0.0 : g_right[k]; }
};

struct Assembly {
  /// Interior block of the stiffness+mass matrix.
  Eigen::MatrixXd matrix;
  /// Interior load with the boundary lifting folded in.
  Eigen::VectorXd load;
  /// Nodal lifting g̃ on all nodes.
  Eigen::VectorXd lifting;
  /// Full (all nodes) matrix, before elimination.
  Eigen::MatrixXd full_matrix;
};

Assembly assemble(const ProblemSpec& spec, std::size_t k);

/// Unit stiffness + unit mass on the given node range (interior or all).
Eigen::MatrixXd h1_gram(const Mesh1D& mesh, bool interior_only = true);
Eigen::MatrixXd unit_stiffness(const Mesh1D& mesh, bool interior_only = true);

struct CoefficientRange {
  double min = 0.0, max = 0.0;
};
/// Extremes of the diffusion coefficient over all Gauss points.
CoefficientRange diffusion_range(const ProblemSpec& spec, std::size_t k);

struct DirichletReport {
  /// Nodal solution on all nodes.
  GenVector u;
  CoercivityCertificate cert;
  /// α_k ≥ min A_k · c_P holds per sample.
  bool poincare_bound = false;
  double poincare_constant = 0.0;
  /// ‖T_k w_k − c_k‖/‖c_k‖.
  GenScalar residual;
  GenScalar h1_norm;
  double norm_valuation = 0.0;
  bool moderate = false;
  /// ε_k < 2h with mollified coefficients present.
  IndexSet under_resolved;
};

DirichletReport solve_dirichlet(const ProblemSpec& spec, const NumericPolicy& policy);

struct ObstacleOptions {
  /// Use the assembled energy form as the projection metric instead of the
  /// unit H¹ Gram matrix.
  bool energy_metric = false;
};

struct ObstacleReport {
  GenVector u;
  GenVector psi;
  VISolution vi;
  CoercivityCertificate cert;
  bool complementarity = false;
  /// Per sample: largest violation of the complementarity conditions.
  GenScalar complementarity_defect;
  /// Leftmost and rightmost contact node coordinates; NaN without contact.
  std::vector<double> contact_left, contact_right;
  IndexSet under_resolved;
};

ObstacleReport solve_obstacle(const ProblemSpec& spec, const NumericPolicy& policy, const ObstacleOptions& options = {});

struct ConsistencyReport {
  bool consistent = false;
  double max_deviation = 0.0;
  /// max_node |u_k − u_1| per grid index.
  std::vector<double> deviation;
};

ConsistencyReport classical_consistency_check(const ProblemSpec& spec, const NumericPolicy& policy);

}  // namespace gennet::fem
