#include "gennet/convex_projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gennet/parallel.hpp"

namespace gennet {

std::string_view to_string(ConvexKind kind) {
  switch (kind) {
    case ConvexKind::Box: return "box";
    case ConvexKind::ObstacleLowerBound: return "obstacle_lower_bound";
    case ConvexKind::AffineSubspace: return "affine_subspace";
    case ConvexKind::Halfspaces: return "halfspaces";
    case ConvexKind::BoxUnion: return "box_union";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_box(const BoxSlice& b, Eigen::Index dim) {
  if (b.lower.size() != dim || b.upper.size() != dim) throw Error(ErrorKind::DimMismatch, "box bounds differ from dim");
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (std::isnan(b.lower(j)) || std::isnan(b.upper(j))) throw Error(ErrorKind::InvalidSpec, "NaN box bound");
    if (b.lower(j) > b.upper(j) || b.lower(j) == kInf || b.upper(j) == -kInf)
      throw Error(ErrorKind::EmptySet, "box with lower > upper");
  }
}

Eigen::VectorXd clamp(const BoxSlice& b, const Eigen::VectorXd& x) { return x.cwiseMax(b.lower).cwiseMin(b.upper); }

bool in_box(const BoxSlice& b, const Eigen::VectorXd& x, double tol) {
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (x(j) < b.lower(j) - tol || x(j) > b.upper(j) + tol) return false;
  return true;
}

// Projection onto {y : A y ≤ b} by Lawson–Hanson active set on the dual
//   min_{λ≥0} ½ λᵀ(AAᵀ)λ − λᵀ(Ax − b),   y = x − Aᵀλ.
// Lawson-Hanson NNLS: min ‖E u − f‖ subject to u ≥ 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& E, const Eigen::VectorXd& f) {
  const Eigen::Index m = E.cols();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  std::vector<bool> passive(static_cast<std::size_t>(m), false), blocked(static_cast<std::size_t>(m), false);
  const double wtol = 1e-13 * (1.0 + E.norm()) * (1.0 + f.norm());

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> P;
    for (Eigen::Index i = 0; i < m; ++i)
      if (passive[static_cast<std::size_t>(i)]) P.push_back(i);
    Eigen::MatrixXd EP(E.rows(), static_cast<Eigen::Index>(P.size()));
    for (std::size_t j = 0; j < P.size(); ++j) EP.col(static_cast<Eigen::Index>(j)) = E.col(P[j]);
    const Eigen::VectorXd zP = EP.colPivHouseholderQr().solve(f);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    for (std::size_t j = 0; j < P.size(); ++j) z(P[j]) = zP(static_cast<Eigen::Index>(j));
    return z;
  };

  const int max_outer = static_cast<int>(3 * m + 30);
  for (int outer = 0;; ++outer) {
    if (outer == max_outer) throw Error(ErrorKind::NoConvergence, "halfspace active set did not settle");
    const Eigen::VectorXd w = E.transpose() * (f - E * u);
    Eigen::Index t = -1;
    double best = wtol;
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      if (!passive[ii] && !blocked[ii] && w(i) > best) {
        best = w(i);
        t = i;
      }
    }
    if (t < 0) break;
    passive[static_cast<std::size_t>(t)] = true;
    for (int inner = 0;; ++inner) {
      const Eigen::VectorXd z = solve_passive();
      if (inner == 0 && z(t) <= 0) {
        // Rounding-level gradient: t cannot enter.
        passive[static_cast<std::size_t>(t)] = false;
        blocked[static_cast<std::size_t>(t)] = true;
        break;
      }
      bool positive = true;
      for (Eigen::Index i = 0; i < m; ++i)
        if (passive[static_cast<std::size_t>(i)] && z(i) <= 0) positive = false;
      if (positive) {
        u = z;
        std::fill(blocked.begin(), blocked.end(), false);
        break;
      }
      if (inner > static_cast<int>(m) + 5) throw Error(ErrorKind::NoConvergence, "halfspace active set cycled");
      double alpha = 1.0;
      for (Eigen::Index i = 0; i < m; ++i)
        if (passive[static_cast<std::size_t>(i)] && z(i) <= 0) alpha = std::min(alpha, u(i) / (u(i) - z(i)));
      u += alpha * (z - u);
      for (Eigen::Index i = 0; i < m; ++i)
        if (passive[static_cast<std::size_t>(i)] && u(i) <= 0) {
          passive[static_cast<std::size_t>(i)] = false;
          u(i) = 0;
        }
    }
  }
  return u;
}

// Projection onto {A y ≤ b} as the least-distance program min ‖z‖ s.t.
// −A z ≥ A x − b, reduced to NNLS with E = [−A | h]ᵀ, f = e_{n+1}.
Eigen::VectorXd project_halfspaces(const HalfspaceSlice& hs, const Eigen::VectorXd& x, double tol_abs) {
  const Eigen::Index m = hs.rows.rows(), n = x.size();
  if (m == 0) return x;
  Eigen::MatrixXd A = hs.rows;
  Eigen::VectorXd b = hs.rhs;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double r = A.row(i).norm();
    if (r > 0) {
      A.row(i) /= r;
      b(i) /= r;
    } else if (b(i) < 0) {
      throw Error(ErrorKind::EmptySet, "halfspace row 0 · x ≤ negative");
    }
  }
  const Eigen::VectorXd h = A * x - b;
  if (h.maxCoeff() <= 0) return x;
  const double s = h.cwiseAbs().maxCoeff();

  Eigen::MatrixXd E(n + 1, m);
  E.topRows(n) = -A.transpose();
  E.row(n) = h.transpose() / s;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n + 1);
  f(n) = 1.0;
  const Eigen::VectorXd u = nnls(E, f);
  const Eigen::VectorXd r = E * u - f;
  if (std::abs(r(n)) < 1e-9) throw Error(ErrorKind::EmptySet, "halfspace slice is infeasible");
  const Eigen::VectorXd y = x - s * r.head(n) / r(n);

  const double scale = 1.0 + std::max(x.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  const double violation = (A * y - b).maxCoeff();
  if (violation > 1e3 * tol_abs * scale) {
    std::ostringstream os;
    os << "halfspace projection residual " << violation;
    throw Error(ErrorKind::NoConvergence, os.str());
  }
  return y;
}

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& basis) {
  if (basis.cols() == 0) return basis;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
  qr.setThreshold(1e-12);
  const Eigen::Index r = qr.rank();
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), r);
  return Q;
}

void require_real(const GenVector& u) {
  if (!u.is_real()) throw Error(ErrorKind::FieldMismatch, "convex sets act on real-tagged vector nets");
}

}  // namespace

// ---------------------------------------------------------------------------

ConvexSetNet::ConvexSetNet(GridPtr grid, Eigen::Index dim, ConvexKind kind, std::vector<ConvexSlice> slices)
    : grid_(std::move(grid)), dim_(dim), kind_(kind), slices_(std::move(slices)) {
  if (slices_.size() != grid_->size()) throw Error(ErrorKind::LengthMismatch, "one convex slice per grid point expected");
}

ConvexSetNet ConvexSetNet::box(GridPtr grid, std::vector<Eigen::VectorXd> lower, std::vector<Eigen::VectorXd> upper) {
  if (lower.size() != grid->size() || upper.size() != grid->size())
    throw Error(ErrorKind::LengthMismatch, "box bounds need one entry per grid point");
  const Eigen::Index dim = lower.front().size();
  std::vector<ConvexSlice> slices;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    BoxSlice b{std::move(lower[i]), std::move(upper[i])};
    check_box(b, dim);
    slices.emplace_back(std::move(b));
  }
  return ConvexSetNet(std::move(grid), dim, ConvexKind::Box, std::move(slices));
}

ConvexSetNet ConvexSetNet::box(GridPtr grid, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  const std::size_t K = grid->size();
  return box(std::move(grid), std::vector<Eigen::VectorXd>(K, lower), std::vector<Eigen::VectorXd>(K, upper));
}

ConvexSetNet ConvexSetNet::obstacle(const GenVector& psi) {
  require_real(psi);
  std::vector<ConvexSlice> slices;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    BoxSlice b{psi.real_sample(i), Eigen::VectorXd::Constant(psi.dim(), kInf)};
    check_box(b, psi.dim());
    slices.emplace_back(std::move(b));
  }
  return ConvexSetNet(psi.grid(), psi.dim(), ConvexKind::ObstacleLowerBound, std::move(slices));
}

ConvexSetNet ConvexSetNet::affine(const GenVector& offset, const std::vector<Eigen::MatrixXd>& basis) {
  require_real(offset);
  if (basis.size() != offset.size()) throw Error(ErrorKind::LengthMismatch, "affine basis needs one matrix per grid point");
  std::vector<ConvexSlice> slices;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis[i].rows() != offset.dim()) throw Error(ErrorKind::DimMismatch, "affine basis rows differ from dim");
    slices.emplace_back(AffineSlice{offset.real_sample(i), orthonormal_columns(basis[i])});
  }
  return ConvexSetNet(offset.grid(), offset.dim(), ConvexKind::AffineSubspace, std::move(slices));
}

ConvexSetNet ConvexSetNet::halfspaces(GridPtr grid, std::vector<Eigen::MatrixXd> rows, std::vector<Eigen::VectorXd> rhs) {
  if (rows.size() != grid->size() || rhs.size() != grid->size())
    throw Error(ErrorKind::LengthMismatch, "halfspace data needs one entry per grid point");
  const Eigen::Index dim = rows.front().cols();
  std::vector<ConvexSlice> slices;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].cols() != dim || rows[i].rows() != rhs[i].size())
      throw Error(ErrorKind::DimMismatch, "halfspace rows/rhs shape mismatch");
    slices.emplace_back(HalfspaceSlice{std::move(rows[i]), std::move(rhs[i])});
  }
  return ConvexSetNet(std::move(grid), dim, ConvexKind::Halfspaces, std::move(slices));
}

ConvexSetNet ConvexSetNet::box_union(GridPtr grid, std::vector<std::vector<BoxSlice>> boxes) {
  if (boxes.size() != grid->size()) throw Error(ErrorKind::LengthMismatch, "box union needs one entry per grid point");
  if (boxes.front().empty()) throw Error(ErrorKind::EmptySet, "empty box union");
  const Eigen::Index dim = boxes.front().front().lower.size();
  std::vector<ConvexSlice> slices;
  for (auto& list : boxes) {
    if (list.empty()) throw Error(ErrorKind::EmptySet, "empty box union");
    for (const auto& b : list) check_box(b, dim);
    slices.emplace_back(BoxUnionSlice{std::move(list)});
  }
  return ConvexSetNet(std::move(grid), dim, ConvexKind::BoxUnion, std::move(slices));
}

bool ConvexSetNet::contains(std::size_t i, const Eigen::VectorXd& x, double tol) const {
  if (x.size() != dim_) throw Error(ErrorKind::DimMismatch, "point dimension differs from set");
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxSlice>) {
          return in_box(s, x, tol);
        } else if constexpr (std::is_same_v<T, AffineSlice>) {
          const Eigen::VectorXd d = x - s.offset;
          return (d - s.basis * (s.basis.transpose() * d)).norm() <= tol;
        } else if constexpr (std::is_same_v<T, HalfspaceSlice>) {
          return s.rows.rows() == 0 || (s.rows * x - s.rhs).maxCoeff() <= tol;
        } else {
          return std::any_of(s.boxes.begin(), s.boxes.end(), [&](const BoxSlice& b) { return in_box(b, x, tol); });
        }
      },
      slices_[i]);
}

Eigen::VectorXd ConvexSetNet::interior_hint(std::size_t i, const NumericPolicy& policy) const {
  return project_sample(*this, i, Eigen::VectorXd::Zero(dim_), policy);
}

Eigen::VectorXd project_sample(const ConvexSetNet& C, std::size_t i, const Eigen::VectorXd& x,
                               const NumericPolicy& policy) {
  if (x.size() != C.dim()) throw Error(ErrorKind::DimMismatch, "point dimension differs from set");
  return std::visit(
      [&](const auto& s) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxSlice>) {
          return clamp(s, x);
        } else if constexpr (std::is_same_v<T, AffineSlice>) {
          const Eigen::VectorXd d = x - s.offset;
          return s.offset + s.basis * (s.basis.transpose() * d);
        } else if constexpr (std::is_same_v<T, HalfspaceSlice>) {
          return project_halfspaces(s, x, policy.tol_abs);
        } else {
          Eigen::VectorXd best = clamp(s.boxes.front(), x);
          double dist = (best - x).squaredNorm();
          for (std::size_t b = 1; b < s.boxes.size(); ++b) {
            Eigen::VectorXd p = clamp(s.boxes[b], x);
            const double d = (p - x).squaredNorm();
            if (d < dist) {
              dist = d;
              best = std::move(p);
            }
          }
          return best;
        }
      },
      C.slice(i));
}

Eigen::VectorXd project_sample_metric(const ConvexSetNet& C, std::size_t i, const Eigen::VectorXd& x,
                                      const Eigen::MatrixXd& gram, const NumericPolicy& policy) {
  const auto* box = std::get_if<BoxSlice>(&C.slice(i));
  if (!box) throw Error(ErrorKind::InvalidSpec, "metric projection is only available for box/obstacle sets");
  const Eigen::Index n = x.size();
  if (gram.rows() != n || gram.cols() != n) throw Error(ErrorKind::DimMismatch, "metric shape differs from set dim");

  // Primal-dual active set for min ½(y−x)ᵀG(y−x), l ≤ y ≤ h.
  const Eigen::VectorXd Gx = gram * x;
  const double c = gram.diagonal().cwiseAbs().mean();
  std::vector<signed char> state(static_cast<std::size_t>(n), 0);  // -1 lower, +1 upper, 0 free
  for (Eigen::Index j = 0; j < n; ++j) {
    if (x(j) < box->lower(j)) state[static_cast<std::size_t>(j)] = -1;
    else if (x(j) > box->upper(j)) state[static_cast<std::size_t>(j)] = 1;
  }
  Eigen::VectorXd y(n);
  const int max_iter = static_cast<int>(4 * n + 20);
  for (int it = 0; it < max_iter; ++it) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto sj = state[static_cast<std::size_t>(j)];
      if (sj < 0) y(j) = box->lower(j);
      else if (sj > 0) y(j) = box->upper(j);
      else free.push_back(j);
    }
    if (!free.empty()) {
      const auto nf = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd Gff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        double r = Gx(free[static_cast<std::size_t>(a)]);
        for (Eigen::Index j = 0; j < n; ++j)
          if (state[static_cast<std::size_t>(j)] != 0) r -= gram(free[static_cast<std::size_t>(a)], j) * y(j);
        rhs(a) = r;
        for (Eigen::Index b = 0; b < nf; ++b)
          Gff(a, b) = gram(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(Gff);
      if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidSpec, "metric is not positive definite");
      const Eigen::VectorXd yf = llt.solve(rhs);
      for (Eigen::Index a = 0; a < nf; ++a) y(free[static_cast<std::size_t>(a)]) = yf(a);
    }
    const Eigen::VectorXd lambda = gram * (y - x);
    bool changed = false;
    for (Eigen::Index j = 0; j < n; ++j) {
      signed char next = 0;
      if (lambda(j) + c * (box->lower(j) - y(j)) > 0) next = -1;
      else if (-lambda(j) + c * (y(j) - box->upper(j)) > 0) next = 1;
      if (next != state[static_cast<std::size_t>(j)]) {
        state[static_cast<std::size_t>(j)] = next;
        changed = true;
      }
    }
    if (!changed) return y;
  }
  std::ostringstream os;
  os << "metric projection active set did not settle at grid index " << i;
  (void)policy;
  throw Error(ErrorKind::NoConvergence, os.str());
}

GenVector project_point(const ConvexSetNet& C, const GenVector& u, const NumericPolicy& policy) {
  require_real(u);
  require_same_grid(C.grid(), u.grid());
  if (u.dim() != C.dim()) throw Error(ErrorKind::DimMismatch, "vector net and set differ in dimension");
  std::vector<Eigen::VectorXd> out(u.size());
  parallel_for(u.size(), [&](std::size_t i) { out[i] = project_sample(C, i, u.real_sample(i), policy); });
  return GenVector(u.grid(), out);
}

GenVector project_point(const ConvexSetNet& C, const GenVector& u, const NumericPolicy& policy,
                        const BasicOperator& metric) {
  require_real(u);
  require_same_grid(C.grid(), u.grid());
  require_same_grid(C.grid(), metric.grid());
  std::vector<Eigen::VectorXd> out(u.size());
  parallel_for(u.size(), [&](std::size_t i) {
    out[i] = project_sample_metric(C, i, u.real_sample(i), metric.real_sample(i), policy);
  });
  return GenVector(u.grid(), out);
}

GenScalar characterization_residual(const ConvexSetNet& C, const GenVector& u, const GenVector& v,
                                    const std::vector<GenVector>& probes, const NumericPolicy& policy) {
  require_compatible(u, v);
  require_same_grid(C.grid(), u.grid());
  std::vector<double> res(u.size(), -kInf);
  for (const auto& w : probes) {
    require_compatible(u, w);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const Eigen::VectorXd wi = w.real_sample(i);
      if (!C.contains(i, wi, policy.tol_abs * (1.0 + wi.cwiseAbs().maxCoeff())))
        throw Error(ErrorKind::ProbeNotInSet, "probe sample " + std::to_string(i + 1) + " lies outside C");
      res[i] = std::max(res[i], (w[i] - v[i]).dot(u[i] - v[i]).real());
    }
  }
  if (probes.empty()) std::fill(res.begin(), res.end(), 0.0);
  return GenScalar(u.grid(), res);
}

bool midpoint_closure_check(const ConvexSetNet& C, const std::vector<std::pair<GenVector, GenVector>>& pairs,
                            const NumericPolicy& policy) {
  for (const auto& [a, b] : pairs) {
    require_compatible(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Eigen::VectorXd mid = 0.5 * (a.real_sample(i) + b.real_sample(i));
      if (!C.contains(i, mid, policy.tol_abs * (1.0 + mid.cwiseAbs().maxCoeff()))) return false;
    }
  }
  return true;
}

}  // namespace gennet
