#include "gennet/operators.hpp"

#include <algorithm>
#include <cmath>

namespace gennet {

static Field join(Field a, Field b) { return (a == Field::Complex || b == Field::Complex) ? Field::Complex : Field::Real; }

BasicOperator::BasicOperator(GridPtr grid, std::vector<MatrixC> samples, Field field)
    : grid_(std::move(grid)), samples_(std::move(samples)), field_(field) {
  if (!grid_) throw Error(ErrorKind::GridMismatch, "missing grid");
  if (samples_.size() != grid_->size()) throw Error(ErrorKind::LengthMismatch, "sample count differs from K");
  rows_ = samples_.front().rows();
  cols_ = samples_.front().cols();
  for (const auto& m : samples_) {
    if (m.rows() != rows_ || m.cols() != cols_) throw Error(ErrorKind::DimMismatch, "matrix samples differ in shape");
    if (field_ == Field::Real && m.size() > 0 && m.imag().cwiseAbs().maxCoeff() != 0.0)
      throw Error(ErrorKind::FieldMismatch, "real-tagged operator has imaginary entries");
  }
}

BasicOperator::BasicOperator(GridPtr grid, const std::vector<Eigen::MatrixXd>& samples)
    : BasicOperator(std::move(grid),
                    [&] {
                      std::vector<MatrixC> c;
                      c.reserve(samples.size());
                      for (const auto& s : samples) c.emplace_back(s.cast<Complex>());
                      return c;
                    }(),
                    Field::Real) {}

BasicOperator BasicOperator::identity(GridPtr grid, Eigen::Index d) {
  return constant(std::move(grid), Eigen::MatrixXd::Identity(d, d));
}

BasicOperator BasicOperator::constant(GridPtr grid, const Eigen::MatrixXd& m) {
  std::vector<Eigen::MatrixXd> s(grid->size(), m);
  return BasicOperator(std::move(grid), s);
}

bool BasicOperator::is_moderate(const NumericPolicy& policy) const {
  policy.validate(*grid_);
  for (auto i : policy.tail_indices(*grid_)) {
    const double bound = std::pow((*grid_)[i], -policy.N_mod);
    if (samples_[i].size() > 0 && !(samples_[i].cwiseAbs().maxCoeff() <= bound)) return false;
  }
  return true;
}

namespace {

template <class Op>
BasicOperator combine(const BasicOperator& S, const BasicOperator& T, Op op) {
  require_same_grid(S.grid(), T.grid());
  std::vector<MatrixC> out(S.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(S[i], T[i]);
  return BasicOperator(S.grid(), std::move(out), join(S.field(), T.field()));
}

}  // namespace

BasicOperator operator*(const BasicOperator& S, const BasicOperator& T) {
  if (S.cols() != T.rows()) throw Error(ErrorKind::DimMismatch, "operator composition shape mismatch");
  return combine(S, T, [](const MatrixC& a, const MatrixC& b) -> MatrixC { return a * b; });
}

BasicOperator operator+(const BasicOperator& S, const BasicOperator& T) {
  if (S.rows() != T.rows() || S.cols() != T.cols()) throw Error(ErrorKind::DimMismatch, "operator sum shape mismatch");
  return combine(S, T, [](const MatrixC& a, const MatrixC& b) -> MatrixC { return a + b; });
}

BasicOperator operator-(const BasicOperator& S, const BasicOperator& T) {
  if (S.rows() != T.rows() || S.cols() != T.cols()) throw Error(ErrorKind::DimMismatch, "operator difference shape mismatch");
  return combine(S, T, [](const MatrixC& a, const MatrixC& b) -> MatrixC { return a - b; });
}

BasicFunctional::BasicFunctional(GridPtr grid, std::vector<Eigen::RowVectorXcd> samples, Field field)
    : grid_(std::move(grid)), samples_(std::move(samples)), field_(field) {
  if (!grid_) throw Error(ErrorKind::GridMismatch, "missing grid");
  if (samples_.size() != grid_->size()) throw Error(ErrorKind::LengthMismatch, "sample count differs from K");
  dim_ = samples_.front().size();
  for (const auto& r : samples_)
    if (r.size() != dim_) throw Error(ErrorKind::DimMismatch, "covector samples differ in dimension");
}

GenScalar BasicFunctional::operator()(const GenVector& u) const {
  require_same_grid(grid_, u.grid());
  if (u.dim() != dim_) throw Error(ErrorKind::DimMismatch, "functional and vector differ in dimension");
  std::vector<Complex> s(u.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = (samples_[i] * u[i])(0);
  const Field f = join(field_, u.field());
  if (f == Field::Real)
    for (auto& z : s) z = Complex(z.real(), 0.0);
  return GenScalar(grid_, std::move(s), f);
}

GenVector apply(const BasicOperator& T, const GenVector& u) {
  require_same_grid(T.grid(), u.grid());
  if (T.cols() != u.dim()) throw Error(ErrorKind::DimMismatch, "operator and vector shapes differ");
  std::vector<VectorC> s(u.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = T[i] * u[i];
  return GenVector(u.grid(), std::move(s), join(T.field(), u.field()));
}

BasicOperator adjoint(const BasicOperator& T) {
  std::vector<MatrixC> s(T.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = T[i].adjoint();
  return BasicOperator(T.grid(), std::move(s), T.field());
}

GenScalar op_norm_net(const BasicOperator& T) {
  return GenScalar::from_function(T.grid(), [&](std::size_t i, double) {
    if (T[i].size() == 0) return 0.0;
    Eigen::BDCSVD<MatrixC> svd(T[i]);
    return svd.singularValues()(0);
  });
}

GenVector riesz_representer(const BasicFunctional& f) {
  std::vector<VectorC> s(f.samples().size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = f[i].adjoint();
  return GenVector(f.grid(), std::move(s), f.field());
}

OperatorDefects operator_defects(const BasicOperator& T) {
  const auto& grid = T.grid();
  auto defect = [&](auto fn) {
    return GenScalar::from_function(grid, [&](std::size_t i, double) -> double {
      const MatrixC d = fn(T[i]);
      return d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff();
    });
  };
  const Eigen::Index n = T.cols();
  OperatorDefects d;
  d.isometry = defect([&](const MatrixC& m) -> MatrixC { return m.adjoint() * m - MatrixC::Identity(n, n); });
  if (T.square()) {
    d.co_isometry = defect([&](const MatrixC& m) -> MatrixC { return m * m.adjoint() - MatrixC::Identity(n, n); });
    d.self_adjoint = defect([](const MatrixC& m) -> MatrixC { return m - m.adjoint(); });
    d.idempotency = defect([](const MatrixC& m) -> MatrixC { return m * m - m; });
  } else {
    d.co_isometry = d.self_adjoint = d.idempotency = GenScalar::zero(grid);
  }
  return d;
}

static double defect_scale(const BasicOperator& T, const NumericPolicy& policy) {
  policy.validate(*T.grid());
  double scale = 1.0;
  for (auto i : policy.tail_indices(*T.grid())) {
    const double n = T[i].size() == 0 ? 0.0 : T[i].norm();
    scale = std::max(scale, n * n);
  }
  return scale;
}

bool is_isometric(const BasicOperator& T, const NumericPolicy& policy) {
  return is_numerically_negligible(operator_defects(T).isometry, policy, defect_scale(T, policy));
}

OperatorFlags classify_operator(const BasicOperator& T, const NumericPolicy& policy) {
  if (!T.square())
    throw Error(ErrorKind::DimMismatch, "unitary/self-adjoint/projection flags need a square operator");
  const auto d = operator_defects(T);
  const double scale = defect_scale(T, policy);
  OperatorFlags f;
  f.isometric = is_numerically_negligible(d.isometry, policy, scale);
  f.unitary = f.isometric && is_numerically_negligible(d.co_isometry, policy, scale);
  f.self_adjoint = is_numerically_negligible(d.self_adjoint, policy, scale);
  f.projection = f.self_adjoint && is_numerically_negligible(d.idempotency, policy, scale);
  return f;
}

}  // namespace gennet
