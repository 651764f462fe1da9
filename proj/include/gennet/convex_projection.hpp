#pragma once

// Internal convex sets [(C_ε)_ε] given by one closed convex set per grid
// point, and the projection P_C(u) = [(P_{C_ε}(u_ε))_ε].

#include <utility>
#include <variant>
#include <vector>

#include "gennet/hilbert_module.hpp"
#include "gennet/operators.hpp"

namespace gennet {

enum class ConvexKind { Box, ObstacleLowerBound, AffineSubspace, Halfspaces, BoxUnion };

std::string_view to_string(ConvexKind kind);

/// l ≤ x ≤ u componentwise; ±∞ allowed.
struct BoxSlice {
  Eigen::VectorXd lower, upper;
};
/// offset + span(basis); basis columns are orthonormal after construction.
struct AffineSlice {
  Eigen::VectorXd offset;
  Eigen::MatrixXd basis;
};
/// rows · x ≤ rhs.
struct HalfspaceSlice {
  Eigen::MatrixXd rows;
  Eigen::VectorXd rhs;
};
/// Union of boxes. Not convex in general; only meant as a negative fixture
/// for midpoint_closure_check (projection picks the nearest box).
struct BoxUnionSlice {
  std::vector<BoxSlice> boxes;
};

using ConvexSlice = std::variant<BoxSlice, AffineSlice, HalfspaceSlice, BoxUnionSlice>;

class ConvexSetNet {
 public:
  static ConvexSetNet box(GridPtr grid, std::vector<Eigen::VectorXd> lower, std::vector<Eigen::VectorXd> upper);
  static ConvexSetNet box(GridPtr grid, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);
  /// {x : x ≥ ψ_k}.
  static ConvexSetNet obstacle(const GenVector& psi);
  static ConvexSetNet affine(const GenVector& offset, const std::vector<Eigen::MatrixXd>& basis);
  static ConvexSetNet halfspaces(GridPtr grid, std::vector<Eigen::MatrixXd> rows, std::vector<Eigen::VectorXd> rhs);
  static ConvexSetNet box_union(GridPtr grid, std::vector<std::vector<BoxSlice>> boxes);

  const GridPtr& grid() const noexcept { return grid_; }
  Eigen::Index dim() const noexcept { return dim_; }
  ConvexKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return slices_.size(); }
  const ConvexSlice& slice(std::size_t i) const { return slices_[i]; }

  bool contains(std::size_t i, const Eigen::VectorXd& x, double tol) const;
  /// A point of C_k (projection of the origin).
  Eigen::VectorXd interior_hint(std::size_t i, const NumericPolicy& policy) const;

 private:
  ConvexSetNet(GridPtr grid, Eigen::Index dim, ConvexKind kind, std::vector<ConvexSlice> slices);
  GridPtr grid_;
  Eigen::Index dim_ = 0;
  ConvexKind kind_ = ConvexKind::Box;
  std::vector<ConvexSlice> slices_;
};

/// Euclidean projection of one sample.
Eigen::VectorXd project_sample(const ConvexSetNet& C, std::size_t i, const Eigen::VectorXd& x,
                               const NumericPolicy& policy);

/// Projection of one sample in the inner product ⟨x,y⟩_G = yᵀGx (G SPD),
/// for box and obstacle kinds. Solved by a primal-dual active-set iteration.
Eigen::VectorXd project_sample_metric(const ConvexSetNet& C, std::size_t i, const Eigen::VectorXd& x,
                                      const Eigen::MatrixXd& gram, const NumericPolicy& policy);

GenVector project_point(const ConvexSetNet& C, const GenVector& u, const NumericPolicy& policy);
GenVector project_point(const ConvexSetNet& C, const GenVector& u, const NumericPolicy& policy,
                        const BasicOperator& metric);

/// max over probes w of Re⟨u_k − v_k, w_k − v_k⟩; ≤ 0 (to tol) certifies
/// v = P_C(u) against the probe set.
GenScalar characterization_residual(const ConvexSetNet& C, const GenVector& u, const GenVector& v,
                                    const std::vector<GenVector>& probes, const NumericPolicy& policy);

/// (c₁ + c₂)/2 ∈ C per sample for every pair.
bool midpoint_closure_check(const ConvexSetNet& C, const std::vector<std::pair<GenVector, GenVector>>& pairs,
                            const NumericPolicy& policy);

}  // namespace gennet
