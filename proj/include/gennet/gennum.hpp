#pragma once

// Generalized numbers represented by nets of samples on a finite, strictly
// decreasing ε-grid. Asymptotic quantifiers ("for all q", "there exists m")
// are interpreted on the tail window (smallest ε values) with the exponents
// of a NumericPolicy.

#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gennet/error.hpp"

namespace gennet {

using Complex = std::complex<double>;

enum class Field { Real, Complex };

/// Strictly decreasing ε values in (0,1]. Index i (0-based) is grid point
/// k = i + 1 in user-facing tables.
class EpsGrid {
 public:
  /// ε_k = base^k for k = 1..K.
  static std::shared_ptr<const EpsGrid> geometric(std::size_t K = 24, double base = 0.5);
  static std::shared_ptr<const EpsGrid> from_values(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  /// base for geometric grids, NaN otherwise.
  double base() const noexcept { return base_; }

  bool operator==(const EpsGrid& other) const { return values_ == other.values_; }

 private:
  EpsGrid(std::vector<double> values, double base);
  std::vector<double> values_;
  double base_;
};

using GridPtr = std::shared_ptr<const EpsGrid>;

struct NumericPolicy {
  double q_neg = 10;
  double m_inv = 10;
  double N_mod = 20;
  std::size_t tail = 8;
  double tol_abs = 1e-12;

  /// Throws InvalidSpec unless tail ≤ K and all exponents ≥ 1.
  void validate(const EpsGrid& grid) const;
  /// Indices of the `tail` smallest ε values, ascending.
  std::vector<std::size_t> tail_indices(const EpsGrid& grid) const;
};

/// Subset of grid indices; stand-in for S ⊆ (0,1].
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(std::size_t K, bool value = false) : mask_(K, value) {}

  static IndexSet all(std::size_t K) { return IndexSet(K, true); }
  static IndexSet none(std::size_t K) { return IndexSet(K, false); }
  template <class Pred>
  static IndexSet where(std::size_t K, Pred pred) {
    IndexSet s(K);
    for (std::size_t i = 0; i < K; ++i) s.mask_[i] = static_cast<bool>(pred(i));
    return s;
  }

  std::size_t universe() const noexcept { return mask_.size(); }
  bool contains(std::size_t i) const { return mask_.at(i); }
  void insert(std::size_t i) { mask_.at(i) = true; }
  void erase(std::size_t i) { mask_.at(i) = false; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::vector<std::size_t> members() const;

  IndexSet complement() const;
  IndexSet operator&(const IndexSet& other) const;
  IndexSet operator|(const IndexSet& other) const;
  bool operator==(const IndexSet& other) const = default;

 private:
  std::vector<bool> mask_;
};

/// A net (r_ε) standing for an element of R̃ or C̃.
class GenScalar {
 public:
  GenScalar() = default;
  GenScalar(GridPtr grid, std::vector<Complex> samples, Field field);
  GenScalar(GridPtr grid, std::span<const double> samples);

  static GenScalar constant(GridPtr grid, double value);
  static GenScalar constant(GridPtr grid, Complex value);
  static GenScalar zero(GridPtr grid) { return constant(std::move(grid), 0.0); }
  template <class Fn>
  static GenScalar from_function(GridPtr grid, Fn fn) {
    std::vector<double> s(grid->size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = fn(i, (*grid)[i]);
    return GenScalar(grid, s);
  }

  const GridPtr& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return samples_.size(); }
  Field field() const noexcept { return field_; }
  bool is_real() const noexcept { return field_ == Field::Real; }
  const std::vector<Complex>& samples() const noexcept { return samples_; }
  Complex operator[](std::size_t i) const { return samples_[i]; }
  /// Real part of sample i.
  double re(std::size_t i) const { return samples_[i].real(); }
  std::vector<double> real_samples() const;

  GenScalar& operator+=(const GenScalar& other);
  GenScalar& operator-=(const GenScalar& other);
  GenScalar& operator*=(const GenScalar& other);
  GenScalar& operator*=(double c);

 private:
  GridPtr grid_;
  std::vector<Complex> samples_;
  Field field_ = Field::Real;
};

GenScalar operator+(GenScalar a, const GenScalar& b);
GenScalar operator-(GenScalar a, const GenScalar& b);
GenScalar operator*(GenScalar a, const GenScalar& b);
GenScalar operator*(double c, GenScalar a);
GenScalar operator-(const GenScalar& a);
GenScalar conj(const GenScalar& a);
GenScalar abs(const GenScalar& a);

void require_same_grid(const GridPtr& a, const GridPtr& b);

GenScalar make_power_net(double c, double a, const GridPtr& grid);
GenScalar make_power_net(Complex c, double a, const GridPtr& grid);

/// Componentwise √max(a_k, 0). Throws NotNonnegative unless ge_zero(a).
GenScalar sqrt_nonneg(const GenScalar& a, const NumericPolicy& policy);

/// Least-squares slope of log|a_k| against log ε_k on the tail, exact zeros
/// excluded; +∞ when the tail is identically zero.
double valuation_estimate(const GenScalar& a, const NumericPolicy& policy);
/// e^{-ν(a)}; 0 for ν = +∞.
double sharp_norm(const GenScalar& a, const NumericPolicy& policy);

bool is_negligible(const GenScalar& a, const NumericPolicy& policy);
bool is_moderate(const GenScalar& a, const NumericPolicy& policy);
/// Floating-point aware negligibility: |a_k| ≤ ε_k^q + tol_abs·scale on the
/// tail. Used for defect nets produced by rounding-level computations.
bool is_numerically_negligible(const GenScalar& a, const NumericPolicy& policy, double scale = 1.0);

/// a_k ≥ -ε_k^{q_neg} on the tail. Requires a real-tagged net.
bool ge_zero(const GenScalar& a, const NumericPolicy& policy);
bool ge(const GenScalar& a, const GenScalar& b, const NumericPolicy& policy);
bool le(const GenScalar& a, const GenScalar& b, const NumericPolicy& policy);
bool eq(const GenScalar& a, const GenScalar& b, const NumericPolicy& policy);

/// e_S: 1 on S, 0 elsewhere.
GenScalar idempotent(const IndexSet& S, const GridPtr& grid);

struct InvertibilityVerdict {
  bool invertible = false;
  /// Smallest integer m ≤ m_inv with |a_k| ≥ ε_k^m on tail ∩ S.
  std::optional<int> witness;
};

InvertibilityVerdict invertible_wrt(const GenScalar& a, const IndexSet& S, const NumericPolicy& policy);
bool zero_wrt(const GenScalar& a, const IndexSet& S, const NumericPolicy& policy);

/// For x·y negligible, returns S = {k : |x_k| ≤ |y_k|} after certifying
/// x e_S = 0 and y e_{∁S} = 0 on the tail.
IndexSet zero_divisor_split(const GenScalar& x, const GenScalar& y, const NumericPolicy& policy);

struct CloseInfimumReport {
  bool lower_bound = false;
  bool close = false;
  /// m → index into the candidate list of an element a ≤ δ + ε^m.
  std::map<int, std::size_t> witnesses;
};

CloseInfimumReport close_infimum_check(const GenScalar& delta, std::span<const GenScalar> candidates,
                                       const NumericPolicy& policy);

}  // namespace gennet
