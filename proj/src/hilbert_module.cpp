#include "gennet/hilbert_module.hpp"

#include <algorithm>
#include <cmath>

namespace gennet {

GenVector::GenVector(GridPtr grid, std::vector<VectorC> samples, Field field)
    : grid_(std::move(grid)), samples_(std::move(samples)), field_(field) {
  if (!grid_) throw Error(ErrorKind::GridMismatch, "missing grid");
  if (samples_.size() != grid_->size()) throw Error(ErrorKind::LengthMismatch, "sample count differs from K");
  dim_ = samples_.empty() ? 0 : samples_.front().size();
  for (const auto& s : samples_) {
    if (s.size() != dim_) throw Error(ErrorKind::DimMismatch, "sample vectors differ in dimension");
    if (field_ == Field::Real && s.imag().cwiseAbs().maxCoeff() != 0.0)
      throw Error(ErrorKind::FieldMismatch, "real-tagged vector net has imaginary part");
  }
}

GenVector::GenVector(GridPtr grid, const std::vector<Eigen::VectorXd>& samples)
    : GenVector(std::move(grid),
                [&] {
                  std::vector<VectorC> c;
                  c.reserve(samples.size());
                  for (const auto& s : samples) c.emplace_back(s.cast<Complex>());
                  return c;
                }(),
                Field::Real) {}

GenVector GenVector::zero(GridPtr grid, Eigen::Index dim) {
  return constant(std::move(grid), Eigen::VectorXd::Zero(dim));
}

GenVector GenVector::constant(GridPtr grid, const Eigen::VectorXd& v) {
  std::vector<Eigen::VectorXd> s(grid->size(), v);
  return GenVector(std::move(grid), s);
}

void require_compatible(const GenVector& u, const GenVector& v) {
  require_same_grid(u.grid(), v.grid());
  if (u.dim() != v.dim()) throw Error(ErrorKind::DimMismatch, "vector nets differ in dimension");
}

static Field join(Field a, Field b) { return (a == Field::Complex || b == Field::Complex) ? Field::Complex : Field::Real; }

GenVector& GenVector::operator+=(const GenVector& other) {
  require_compatible(*this, other);
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += other.samples_[i];
  field_ = join(field_, other.field_);
  return *this;
}

GenVector& GenVector::operator-=(const GenVector& other) {
  require_compatible(*this, other);
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= other.samples_[i];
  field_ = join(field_, other.field_);
  return *this;
}

GenVector operator+(GenVector a, const GenVector& b) { return a += b; }
GenVector operator-(GenVector a, const GenVector& b) { return a -= b; }

GenVector operator*(const GenScalar& lambda, const GenVector& u) {
  require_same_grid(lambda.grid(), u.grid());
  std::vector<VectorC> s(u.samples());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= lambda[i];
  return GenVector(u.grid(), std::move(s), join(lambda.field(), u.field()));
}

GenVector operator*(double c, const GenVector& u) {
  std::vector<VectorC> s(u.samples());
  for (auto& v : s) v *= c;
  return GenVector(u.grid(), std::move(s), u.field());
}

GenScalar inner(const GenVector& u, const GenVector& v) {
  require_compatible(u, v);
  std::vector<Complex> s(u.size());
  // Eigen's dot conjugates its first argument: v.dot(u) = Σ conj(v_i) u_i.
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = v[i].dot(u[i]);
  const Field f = join(u.field(), v.field());
  if (f == Field::Real)
    for (auto& z : s) z = Complex(z.real(), 0.0);
  return GenScalar(u.grid(), std::move(s), f);
}

GenScalar rnorm(const GenVector& u) {
  return GenScalar::from_function(u.grid(), [&](std::size_t i, double) { return u[i].norm(); });
}

double upn(const GenVector& u, const NumericPolicy& policy) { return sharp_norm(rnorm(u), policy); }

GenVector normalize(const GenVector& u, const NumericPolicy& policy) {
  std::vector<VectorC> s(u.samples());
  for (auto& v : s) {
    const double n = v.norm();
    if (n > policy.tol_abs)
      v /= n;
    else
      v.setZero();
  }
  return GenVector(u.grid(), std::move(s), u.field());
}

GenVector lincomb(const std::vector<GenScalar>& coeffs, const std::vector<GenVector>& vecs) {
  if (coeffs.size() != vecs.size() || vecs.empty())
    throw Error(ErrorKind::LengthMismatch, "lincomb needs equally many (nonzero) coefficients and vectors");
  GenVector out = coeffs.front() * vecs.front();
  for (std::size_t j = 1; j < vecs.size(); ++j) out += coeffs[j] * vecs[j];
  return out;
}

double max_abs_component(const GenVector& u) {
  double m = 0;
  for (const auto& v : u.samples()) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace gennet
