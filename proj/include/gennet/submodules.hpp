#pragma once

// Finitely generated submodules of G_{K^d}: interleaved Gram-Schmidt,
// idempotent-norm normalization, orthogonal projection and classification.

#include <optional>
#include <string>
#include <vector>

#include "gennet/operators.hpp"

namespace gennet {

struct GeneratorSet {
  std::vector<GenVector> gens;

  /// Throws unless gens is nonempty with a shared grid, dim and field.
  void validate() const;
};

/// Raw interleaved Gram-Schmidt output: one mutually orthogonal vector per
/// generator slot, not normalized. blocks[j] is the first-level block S_j
/// where generator j dominates.
struct RawOrthogonalization {
  std::vector<GenVector> vecs;
  std::vector<IndexSet> blocks;
};

RawOrthogonalization orthogonalize(const GeneratorSet& g);

struct OrthoBasis {
  std::vector<GenVector> vecs;
  /// rnorm(vecs[j]) = e_{supports[j]}.
  std::vector<IndexSet> supports;
  /// Generator slot that produced vecs[j].
  std::vector<std::size_t> slots;
  /// First-level dominance blocks, one per generator.
  std::vector<IndexSet> blocks;

  std::size_t size() const noexcept { return vecs.size(); }
  /// Orthogonality and idempotent-norm checks; throws InvalidBasis.
  void validate(const NumericPolicy& policy) const;
};

/// Orthogonalizes, then normalizes each output on
/// S_j = {k : ‖v_{j,k}‖ ≥ ε_k^{m_inv}}. Empty-support outputs are dropped.
OrthoBasis interleaved_gram_schmidt(const GeneratorSet& g, const NumericPolicy& policy);

struct IdempotentNormalization {
  GenVector w;
  IndexSet support;
};

/// w = u/‖u‖ on S = {k : ‖u_k‖ ≥ ε_k^{m_inv}}, 0 elsewhere. Throws
/// MixedScaleGenerator when a tail sample has ε^{q_neg} < ‖u_k‖ < ε^{m_inv}.
IdempotentNormalization idempotent_normalize(const GenVector& u, const NumericPolicy& policy);

/// Σ_j ⟨v, w_j⟩ w_j.
GenVector project_submodule(const OrthoBasis& B, const GenVector& v, const NumericPolicy& policy);

/// P_M as a matrix net Σ_j w_j w_jᴴ.
BasicOperator projection_operator(const OrthoBasis& B, const NumericPolicy& policy);

struct SubmoduleDiagnostics {
  /// Slot of the offending generator and its 1-based grid indices.
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> mixed_scale;
  std::vector<std::string> messages;
};

struct SubmoduleClassification {
  bool closed_edged = false;
  std::optional<OrthoBasis> basis;
  SubmoduleDiagnostics diagnostics;
};

SubmoduleClassification classify_submodule(const GeneratorSet& g, const NumericPolicy& policy);

/// u ↦ f(P_M u) = Σ_j ⟨u, w_j⟩ f(w_j), from the values f(w_j).
BasicFunctional extend_functional(const std::vector<GenScalar>& values, const OrthoBasis& B,
                                  const NumericPolicy& policy);

/// β_k = ε_k^{⌈k/3⌉} (1-based k): blocks of three grid points per exponent.
GenScalar beta_net(const GridPtr& grid);

}  // namespace gennet
