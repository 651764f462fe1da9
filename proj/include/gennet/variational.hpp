#pragma once

// Coercivity certificates, the generalized Lax-Milgram solve and two solvers
// for the variational inequality  ⟨Tu − c, v − u⟩ ≥ 0  for all v ∈ C.

#include <optional>
#include <vector>

#include "gennet/convex_projection.hpp"
#include "gennet/operators.hpp"

namespace gennet {

struct CoercivityCertificate {
  GenScalar alpha;
  /// Smallest m with α_k ≥ ε_k^m on the tail; -1 when none up to m_inv.
  int witness_exponent = -1;
  bool valid = false;
};

/// α_k = λ_min((T_k + T_k*)/2). With a metric G (SPD net), α_k is the least
/// generalized eigenvalue of the symmetric part relative to G_k instead.
CoercivityCertificate certify_coercivity(const BasicOperator& T, const NumericPolicy& policy,
                                         const BasicOperator* metric = nullptr);

/// Solves T_k u_k = c_k per sample with iterative refinement.
GenVector lax_milgram_solve(const BasicOperator& T, const GenVector& c, const CoercivityCertificate& cert,
                            const NumericPolicy& policy);

struct VISolution {
  GenVector u;
  std::vector<std::size_t> iterations;
  GenScalar contraction_k;
  /// Fixed-point residual ‖S(u) − u‖ at the returned iterate.
  GenScalar residual;
  GenScalar rho;
  GenScalar M;
  GenScalar alpha;
  /// Per-sample step norms ‖u_{n+1} − u_n‖ (contraction solver).
  std::vector<std::vector<double>> steps;
  /// Per-sample values of I(u_n) (minimization solver).
  std::vector<std::vector<double>> energies;
};

/// I(u) = ⟨Tu,u⟩ − 2⟨c,u⟩ per sample.
double energy_sample(const Eigen::MatrixXd& T, const Eigen::VectorXd& c, const Eigen::VectorXd& u);

/// Projected gradient with exact line search on I over C (T self-adjoint).
VISolution vi_solve_minimization(const BasicOperator& T, const GenVector& c, const ConvexSetNet& C,
                                 const NumericPolicy& policy);

struct ContractionOptions {
  /// Inner product ⟨x,y⟩_G used for the projection and the contraction
  /// estimate; Euclidean when null. Box/obstacle sets only.
  const BasicOperator* metric = nullptr;
  std::optional<GenVector> start;
  /// 0 selects the a-priori budget.
  std::size_t max_iterations = 0;
};

/// u ← P_C(u − ρ G⁻¹(Tu − c)), ρ = α/M², k = (1 − α²/M²)^{1/2}.
VISolution vi_solve_contraction(const BasicOperator& T, const GenVector& c, const ConvexSetNet& C,
                                const CoercivityCertificate& cert, const NumericPolicy& policy,
                                const ContractionOptions& options = {});

}  // namespace gennet
