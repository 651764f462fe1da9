#include "gennet/gennum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gennet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::FieldMismatch: return "FieldMismatch";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NotNonnegative: return "NotNonnegative";
    case ErrorKind::EmptyTailIntersection: return "EmptyTailIntersection";
    case ErrorKind::NotZeroProduct: return "NotZeroProduct";
    case ErrorKind::SplitFailed: return "SplitFailed";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ProbeNotInSet: return "ProbeNotInSet";
    case ErrorKind::MixedScaleGenerator: return "MixedScaleGenerator";
    case ErrorKind::InvalidBasis: return "InvalidBasis";
    case ErrorKind::InvalidCertificate: return "InvalidCertificate";
    case ErrorKind::SingularSample: return "SingularSample";
    case ErrorKind::IterationBudgetExceeded: return "IterationBudgetExceeded";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::CoercivityFailure: return "CoercivityFailure";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::MalformedSummary: return "MalformedSummary";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// EpsGrid / NumericPolicy / IndexSet

EpsGrid::EpsGrid(std::vector<double> values, double base) : values_(std::move(values)), base_(base) {
  if (values_.size() < 8) throw Error(ErrorKind::InvalidSpec, "grid needs at least 8 points");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double e = values_[i];
    if (!(e > 0.0 && e <= 1.0)) throw Error(ErrorKind::InvalidSpec, "grid values must lie in (0,1]");
    if (i > 0 && !(e < values_[i - 1])) throw Error(ErrorKind::InvalidSpec, "grid must be strictly decreasing");
  }
}

std::shared_ptr<const EpsGrid> EpsGrid::geometric(std::size_t K, double base) {
  if (!(base > 0.0 && base < 1.0)) throw Error(ErrorKind::InvalidSpec, "grid base must lie in (0,1)");
  std::vector<double> v(K);
  for (std::size_t i = 0; i < K; ++i) v[i] = std::pow(base, static_cast<double>(i + 1));
  return std::shared_ptr<const EpsGrid>(new EpsGrid(std::move(v), base));
}

std::shared_ptr<const EpsGrid> EpsGrid::from_values(std::vector<double> values) {
  return std::shared_ptr<const EpsGrid>(new EpsGrid(std::move(values), std::numeric_limits<double>::quiet_NaN()));
}

void NumericPolicy::validate(const EpsGrid& grid) const {
  if (tail == 0 || tail > grid.size()) throw Error(ErrorKind::InvalidSpec, "policy tail must be in [1, K]");
  if (q_neg < 1 || m_inv < 1 || N_mod < 1) throw Error(ErrorKind::InvalidSpec, "policy exponents must be >= 1");
  if (!(tol_abs > 0)) throw Error(ErrorKind::InvalidSpec, "tol_abs must be positive");
}

std::vector<std::size_t> NumericPolicy::tail_indices(const EpsGrid& grid) const {
  const std::size_t K = grid.size();
  const std::size_t t = std::min(tail, K);
  std::vector<std::size_t> out(t);
  for (std::size_t j = 0; j < t; ++j) out[j] = K - t + j;
  return out;
}

std::size_t IndexSet::count() const { return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true)); }

std::vector<std::size_t> IndexSet::members() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i]) out.push_back(i);
  return out;
}

IndexSet IndexSet::complement() const {
  IndexSet s(mask_.size());
  for (std::size_t i = 0; i < mask_.size(); ++i) s.mask_[i] = !mask_[i];
  return s;
}

IndexSet IndexSet::operator&(const IndexSet& other) const {
  if (other.universe() != universe()) throw Error(ErrorKind::GridMismatch, "index sets over different grids");
  IndexSet s(mask_.size());
  for (std::size_t i = 0; i < mask_.size(); ++i) s.mask_[i] = mask_[i] && other.mask_[i];
  return s;
}

IndexSet IndexSet::operator|(const IndexSet& other) const {
  if (other.universe() != universe()) throw Error(ErrorKind::GridMismatch, "index sets over different grids");
  IndexSet s(mask_.size());
  for (std::size_t i = 0; i < mask_.size(); ++i) s.mask_[i] = mask_[i] || other.mask_[i];
  return s;
}

// ---------------------------------------------------------------------------
// GenScalar

void require_same_grid(const GridPtr& a, const GridPtr& b) {
  if (!a || !b) throw Error(ErrorKind::GridMismatch, "missing grid");
  if (a != b && !(*a == *b)) throw Error(ErrorKind::GridMismatch, "nets live on different grids");
}

GenScalar::GenScalar(GridPtr grid, std::vector<Complex> samples, Field field)
    : grid_(std::move(grid)), samples_(std::move(samples)), field_(field) {
  if (!grid_) throw Error(ErrorKind::GridMismatch, "missing grid");
  if (samples_.size() != grid_->size()) throw Error(ErrorKind::LengthMismatch, "sample count differs from K");
  if (field_ == Field::Real)
    for (const auto& s : samples_)
      if (s.imag() != 0.0) throw Error(ErrorKind::FieldMismatch, "real-tagged net has imaginary part");
}

GenScalar::GenScalar(GridPtr grid, std::span<const double> samples)
    : GenScalar(std::move(grid), std::vector<Complex>(samples.begin(), samples.end()), Field::Real) {}

GenScalar GenScalar::constant(GridPtr grid, double value) {
  const std::size_t K = grid->size();
  return GenScalar(std::move(grid), std::vector<Complex>(K, Complex(value, 0.0)), Field::Real);
}

GenScalar GenScalar::constant(GridPtr grid, Complex value) {
  const std::size_t K = grid->size();
  return GenScalar(std::move(grid), std::vector<Complex>(K, value), Field::Complex);
}

std::vector<double> GenScalar::real_samples() const {
  std::vector<double> out(samples_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = samples_[i].real();
  return out;
}

static Field join(Field a, Field b) { return (a == Field::Complex || b == Field::Complex) ? Field::Complex : Field::Real; }

GenScalar& GenScalar::operator+=(const GenScalar& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += other.samples_[i];
  field_ = join(field_, other.field_);
  return *this;
}

GenScalar& GenScalar::operator-=(const GenScalar& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= other.samples_[i];
  field_ = join(field_, other.field_);
  return *this;
}

GenScalar& GenScalar::operator*=(const GenScalar& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] *= other.samples_[i];
  field_ = join(field_, other.field_);
  return *this;
}

GenScalar& GenScalar::operator*=(double c) {
  for (auto& s : samples_) s *= c;
  return *this;
}

GenScalar operator+(GenScalar a, const GenScalar& b) { return a += b; }
GenScalar operator-(GenScalar a, const GenScalar& b) { return a -= b; }
GenScalar operator*(GenScalar a, const GenScalar& b) { return a *= b; }
GenScalar operator*(double c, GenScalar a) { return a *= c; }
GenScalar operator-(const GenScalar& a) { return -1.0 * a; }

GenScalar conj(const GenScalar& a) {
  std::vector<Complex> s(a.samples());
  for (auto& z : s) z = std::conj(z);
  return GenScalar(a.grid(), std::move(s), a.field());
}

GenScalar abs(const GenScalar& a) {
  std::vector<Complex> s(a.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::abs(a[i]);
  return GenScalar(a.grid(), std::move(s), Field::Real);
}

GenScalar make_power_net(double c, double a, const GridPtr& grid) {
  return GenScalar::from_function(grid, [&](std::size_t, double eps) { return c * std::pow(eps, a); });
}

GenScalar make_power_net(Complex c, double a, const GridPtr& grid) {
  std::vector<Complex> s(grid->size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = c * std::pow((*grid)[i], a);
  return GenScalar(grid, std::move(s), c.imag() == 0.0 ? Field::Real : Field::Complex);
}

// ---------------------------------------------------------------------------
// Asymptotic classification on the tail

namespace {

void require_real(const GenScalar& a, const char* what) {
  if (!a.is_real()) throw Error(ErrorKind::FieldMismatch, std::string(what) + " requires a real-tagged net");
}

std::vector<std::size_t> tail_of(const GenScalar& a, const NumericPolicy& policy) {
  policy.validate(*a.grid());
  return policy.tail_indices(*a.grid());
}

std::vector<std::size_t> tail_within(const GenScalar& a, const IndexSet& S, const NumericPolicy& policy) {
  if (S.universe() != a.size()) throw Error(ErrorKind::GridMismatch, "index set universe differs from K");
  std::vector<std::size_t> out;
  for (auto i : tail_of(a, policy))
    if (S.contains(i)) out.push_back(i);
  return out;
}

}  // namespace

GenScalar sqrt_nonneg(const GenScalar& a, const NumericPolicy& policy) {
  if (!ge_zero(a, policy)) throw Error(ErrorKind::NotNonnegative, "sqrt of a net that is not >= 0");
  return GenScalar::from_function(a.grid(), [&](std::size_t i, double) { return std::sqrt(std::max(a.re(i), 0.0)); });
}

double valuation_estimate(const GenScalar& a, const NumericPolicy& policy) {
  const auto& grid = *a.grid();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (auto i : tail_of(a, policy)) {
    const double m = std::abs(a[i]);
    if (m == 0.0) continue;
    const double x = std::log(grid[i]);
    const double y = std::log(m);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n == 0) return std::numeric_limits<double>::infinity();
  if (n == 1) return sy / sx;
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  if (denom == 0.0) return sy / sx;
  return (nn * sxy - sx * sy) / denom;
}

double sharp_norm(const GenScalar& a, const NumericPolicy& policy) {
  const double v = valuation_estimate(a, policy);
  if (std::isinf(v) && v > 0) return 0.0;
  return std::exp(-v);
}

bool is_negligible(const GenScalar& a, const NumericPolicy& policy) {
  const auto& grid = *a.grid();
  for (auto i : tail_of(a, policy))
    if (std::abs(a[i]) > std::pow(grid[i], policy.q_neg)) return false;
  return true;
}

bool is_moderate(const GenScalar& a, const NumericPolicy& policy) {
  const auto& grid = *a.grid();
  for (auto i : tail_of(a, policy))
    if (!(std::abs(a[i]) <= std::pow(grid[i], -policy.N_mod))) return false;
  return true;
}

bool is_numerically_negligible(const GenScalar& a, const NumericPolicy& policy, double scale) {
  const auto& grid = *a.grid();
  for (auto i : tail_of(a, policy))
    if (!(std::abs(a[i]) <= std::pow(grid[i], policy.q_neg) + policy.tol_abs * scale)) return false;
  return true;
}

bool ge_zero(const GenScalar& a, const NumericPolicy& policy) {
  require_real(a, "ge_zero");
  const auto& grid = *a.grid();
  for (auto i : tail_of(a, policy))
    if (!(a.re(i) >= -std::pow(grid[i], policy.q_neg))) return false;
  return true;
}

bool ge(const GenScalar& a, const GenScalar& b, const NumericPolicy& policy) { return ge_zero(a - b, policy); }
bool le(const GenScalar& a, const GenScalar& b, const NumericPolicy& policy) { return ge_zero(b - a, policy); }
bool eq(const GenScalar& a, const GenScalar& b, const NumericPolicy& policy) { return is_negligible(a - b, policy); }

GenScalar idempotent(const IndexSet& S, const GridPtr& grid) {
  if (S.universe() != grid->size()) throw Error(ErrorKind::GridMismatch, "index set universe differs from K");
  return GenScalar::from_function(grid, [&](std::size_t i, double) { return S.contains(i) ? 1.0 : 0.0; });
}

InvertibilityVerdict invertible_wrt(const GenScalar& a, const IndexSet& S, const NumericPolicy& policy) {
  const auto idx = tail_within(a, S, policy);
  if (idx.empty()) throw Error(ErrorKind::EmptyTailIntersection, "S does not meet the tail window");
  const auto& grid = *a.grid();
  const int m_max = static_cast<int>(std::floor(policy.m_inv));
  for (int m = 0; m <= m_max; ++m) {
    const bool ok = std::all_of(idx.begin(), idx.end(),
                                [&](std::size_t i) { return std::abs(a[i]) >= std::pow(grid[i], m); });
    if (ok) return {true, m};
  }
  return {false, std::nullopt};
}

bool zero_wrt(const GenScalar& a, const IndexSet& S, const NumericPolicy& policy) {
  const auto idx = tail_within(a, S, policy);
  if (idx.empty()) throw Error(ErrorKind::EmptyTailIntersection, "S does not meet the tail window");
  const auto& grid = *a.grid();
  return std::all_of(idx.begin(), idx.end(),
                     [&](std::size_t i) { return std::abs(a[i]) <= std::pow(grid[i], policy.q_neg); });
}

IndexSet zero_divisor_split(const GenScalar& x, const GenScalar& y, const NumericPolicy& policy) {
  require_same_grid(x.grid(), y.grid());
  if (!is_negligible(x * y, policy)) throw Error(ErrorKind::NotZeroProduct, "x*y is not negligible");
  const std::size_t K = x.size();
  const auto S = IndexSet::where(K, [&](std::size_t i) { return std::abs(x[i]) <= std::abs(y[i]); });
  const auto& grid = *x.grid();
  // Residuals: worst ratio |value| / ε^q on the relevant part of the tail.
  double rx = 0, ry = 0;
  for (auto i : tail_of(x, policy)) {
    const double bound = std::pow(grid[i], policy.q_neg);
    if (S.contains(i))
      rx = std::max(rx, std::abs(x[i]) / bound);
    else
      ry = std::max(ry, std::abs(y[i]) / bound);
  }
  if (rx > 1.0 || ry > 1.0) {
    std::ostringstream os;
    os << "heuristic split does not certify: max |x|/eps^q on S = " << rx << ", max |y|/eps^q off S = " << ry;
    throw Error(ErrorKind::SplitFailed, os.str());
  }
  return S;
}

CloseInfimumReport close_infimum_check(const GenScalar& delta, std::span<const GenScalar> candidates,
                                       const NumericPolicy& policy) {
  CloseInfimumReport report;
  report.lower_bound = std::all_of(candidates.begin(), candidates.end(),
                                   [&](const GenScalar& a) { return ge(a, delta, policy); });
  report.close = true;
  const int m_max = static_cast<int>(std::floor(policy.q_neg));
  for (int m = 1; m <= m_max; ++m) {
    const GenScalar bound = delta + make_power_net(1.0, m, delta.grid());
    bool found = false;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (le(candidates[j], bound, policy)) {
        report.witnesses[m] = j;
        found = true;
        break;
      }
    }
    if (!found) report.close = false;
  }
  return report;
}

}  // namespace gennet
