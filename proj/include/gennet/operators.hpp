#pragma once

// Basic C̃-linear operators and functionals, stored as nets of matrices and
// covectors acting sample by sample.

#include <vector>

#include "gennet/hilbert_module.hpp"

namespace gennet {

class BasicOperator {
 public:
  BasicOperator() = default;
  BasicOperator(GridPtr grid, std::vector<MatrixC> samples, Field field);
  BasicOperator(GridPtr grid, const std::vector<Eigen::MatrixXd>& samples);

  static BasicOperator identity(GridPtr grid, Eigen::Index d);
  static BasicOperator constant(GridPtr grid, const Eigen::MatrixXd& m);
  template <class Fn>
  static BasicOperator from_function(GridPtr grid, Fn fn) {
    std::vector<Eigen::MatrixXd> s;
    s.reserve(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) s.push_back(fn(i, (*grid)[i]));
    return BasicOperator(grid, s);
  }

  const GridPtr& grid() const noexcept { return grid_; }
  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  std::size_t size() const noexcept { return samples_.size(); }
  Field field() const noexcept { return field_; }
  bool is_real() const noexcept { return field_ == Field::Real; }
  const std::vector<MatrixC>& samples() const noexcept { return samples_; }
  const MatrixC& operator[](std::size_t i) const { return samples_[i]; }
  Eigen::MatrixXd real_sample(std::size_t i) const { return samples_[i].real(); }

  /// Every entry net is moderate per the policy.
  bool is_moderate(const NumericPolicy& policy) const;

 private:
  GridPtr grid_;
  Eigen::Index rows_ = 0, cols_ = 0;
  std::vector<MatrixC> samples_;
  Field field_ = Field::Real;
};

BasicOperator operator*(const BasicOperator& S, const BasicOperator& T);
BasicOperator operator+(const BasicOperator& S, const BasicOperator& T);
BasicOperator operator-(const BasicOperator& S, const BasicOperator& T);

/// Covector net f with f(u)_k = f_k · u_k (no conjugation).
class BasicFunctional {
 public:
  BasicFunctional() = default;
  BasicFunctional(GridPtr grid, std::vector<Eigen::RowVectorXcd> samples, Field field);

  const GridPtr& grid() const noexcept { return grid_; }
  Eigen::Index dim() const noexcept { return dim_; }
  Field field() const noexcept { return field_; }
  const std::vector<Eigen::RowVectorXcd>& samples() const noexcept { return samples_; }
  const Eigen::RowVectorXcd& operator[](std::size_t i) const { return samples_[i]; }

  GenScalar operator()(const GenVector& u) const;

 private:
  GridPtr grid_;
  Eigen::Index dim_ = 0;
  std::vector<Eigen::RowVectorXcd> samples_;
  Field field_ = Field::Real;
};

GenVector apply(const BasicOperator& T, const GenVector& u);
/// Componentwise conjugate transpose.
BasicOperator adjoint(const BasicOperator& T);
/// Largest singular value per sample.
GenScalar op_norm_net(const BasicOperator& T);
/// c with f(v) = ⟨v, c⟩ and ‖c_k‖ = ‖f_k‖.
GenVector riesz_representer(const BasicFunctional& f);

struct OperatorFlags {
  bool isometric = false;
  bool unitary = false;
  bool self_adjoint = false;
  bool projection = false;
};

struct OperatorDefects {
  GenScalar isometry;      // max |T*T − I|
  GenScalar co_isometry;   // max |TT* − I|
  GenScalar self_adjoint;  // max |T − T*|
  GenScalar idempotency;   // max |T² − T|
};

/// Entrywise defect nets of the defining identities (square-only entries are
/// zero nets for rectangular T).
OperatorDefects operator_defects(const BasicOperator& T);

/// T*T = I up to rounding; valid for rectangular T.
bool is_isometric(const BasicOperator& T, const NumericPolicy& policy);

/// Flags hold when the defect net is numerically negligible with scale
/// max(1, ‖T_k‖²). unitary/self_adjoint/projection need a square T.
OperatorFlags classify_operator(const BasicOperator& T, const NumericPolicy& policy);

}  // namespace gennet
