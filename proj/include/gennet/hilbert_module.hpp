#pragma once

// The Hilbert C̃-module of nets of vectors in K^d with the componentwise
// scalar product.

#include <Eigen/Dense>
#include <vector>

#include "gennet/gennum.hpp"

namespace gennet {

using VectorC = Eigen::VectorXcd;
using MatrixC = Eigen::MatrixXcd;

class GenVector {
 public:
  GenVector() = default;
  GenVector(GridPtr grid, std::vector<VectorC> samples, Field field);
  /// Real net from real sample vectors.
  GenVector(GridPtr grid, const std::vector<Eigen::VectorXd>& samples);

  static GenVector zero(GridPtr grid, Eigen::Index dim);
  static GenVector constant(GridPtr grid, const Eigen::VectorXd& v);
  template <class Fn>
  static GenVector from_function(GridPtr grid, Fn fn) {
    std::vector<Eigen::VectorXd> s;
    s.reserve(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) s.push_back(fn(i, (*grid)[i]));
    return GenVector(grid, s);
  }

  const GridPtr& grid() const noexcept { return grid_; }
  Eigen::Index dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return samples_.size(); }
  Field field() const noexcept { return field_; }
  bool is_real() const noexcept { return field_ == Field::Real; }
  const std::vector<VectorC>& samples() const noexcept { return samples_; }
  const VectorC& operator[](std::size_t i) const { return samples_[i]; }
  Eigen::VectorXd real_sample(std::size_t i) const { return samples_[i].real(); }

  GenVector& operator+=(const GenVector& other);
  GenVector& operator-=(const GenVector& other);

 private:
  GridPtr grid_;
  Eigen::Index dim_ = 0;
  std::vector<VectorC> samples_;
  Field field_ = Field::Real;
};

GenVector operator+(GenVector a, const GenVector& b);
GenVector operator-(GenVector a, const GenVector& b);
GenVector operator*(const GenScalar& lambda, const GenVector& u);
GenVector operator*(double c, const GenVector& u);

void require_compatible(const GenVector& u, const GenVector& v);

/// ⟨u,v⟩_k = Σ_i u_{k,i} conj(v_{k,i}).
GenScalar inner(const GenVector& u, const GenVector& v);
/// Euclidean norm per sample (real-tagged).
GenScalar rnorm(const GenVector& u);
/// Ultra-pseudo-norm |‖u‖|_e.
double upn(const GenVector& u, const NumericPolicy& policy);

/// u_k/‖u_k‖ where ‖u_k‖ > tol_abs, 0 elsewhere; normalize(u)·rnorm(u) = u.
GenVector normalize(const GenVector& u, const NumericPolicy& policy = {});

GenVector lincomb(const std::vector<GenScalar>& coeffs, const std::vector<GenVector>& vecs);

/// Largest component modulus over all samples.
double max_abs_component(const GenVector& u);

}  // namespace gennet
