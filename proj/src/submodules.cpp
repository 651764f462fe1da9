#include "gennet/submodules.hpp"

#include <cmath>
#include <sstream>

#include "gennet/parallel.hpp"

namespace gennet {

void GeneratorSet::validate() const {
  if (gens.empty()) throw Error(ErrorKind::InvalidSpec, "generator set is empty");
  for (const auto& u : gens) require_compatible(gens.front(), u);
}

namespace {

constexpr double kDropRel = 1e-12;
constexpr double kBasisTol = 1e-10;

struct SampleResult {
  std::vector<VectorC> out;
  std::optional<std::size_t> dominant;
};

SampleResult orthogonalize_sample(const std::vector<VectorC>& u) {
  const std::size_t m = u.size();
  SampleResult r;
  r.out.assign(m, VectorC::Zero(u.front().size()));
  std::vector<VectorC> cur = u;
  std::vector<double> orig(m);
  for (std::size_t j = 0; j < m; ++j) orig[j] = u[j].norm();
  std::vector<bool> done(m, false);
  std::vector<VectorC> chosen;
  for (std::size_t step = 0; step < m; ++step) {
    std::size_t j = m;
    double best = -1.0;
    for (std::size_t l = 0; l < m; ++l) {
      if (done[l]) continue;
      const double n = cur[l].norm();
      if (n > best) {
        best = n;
        j = l;
      }
    }
    if (best <= 0.0) break;
    if (step == 0) r.dominant = j;
    done[j] = true;
    r.out[j] = cur[j];
    chosen.push_back(cur[j] / best);
    for (std::size_t l = 0; l < m; ++l) {
      if (done[l]) continue;
      const VectorC& q = chosen.back();
      cur[l] -= q.dot(cur[l]) * q;
      for (const auto& p : chosen) cur[l] -= p.dot(cur[l]) * p;
      if (cur[l].norm() <= kDropRel * orig[l]) cur[l].setZero();
    }
  }
  return r;
}

std::vector<std::size_t> mixed_scale_indices(const GenVector& u, const NumericPolicy& policy) {
  std::vector<std::size_t> bad;
  const auto& grid = *u.grid();
  for (auto i : policy.tail_indices(grid)) {
    const double n = u[i].norm();
    if (n > std::pow(grid[i], policy.q_neg) && n < std::pow(grid[i], policy.m_inv)) bad.push_back(i + 1);
  }
  return bad;
}

}  // namespace

RawOrthogonalization orthogonalize(const GeneratorSet& g) {
  g.validate();
  const auto& grid = g.gens.front().grid();
  const std::size_t K = grid->size(), m = g.gens.size();
  std::vector<SampleResult> per(K);
  parallel_for(K, [&](std::size_t i) {
    std::vector<VectorC> u(m);
    for (std::size_t j = 0; j < m; ++j) u[j] = g.gens[j][i];
    per[i] = orthogonalize_sample(u);
  });
  const Field field = g.gens.front().field();
  RawOrthogonalization r;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<VectorC> s(K);
    IndexSet block(K);
    for (std::size_t i = 0; i < K; ++i) {
      s[i] = per[i].out[j];
      if (per[i].dominant == j) block.insert(i);
    }
    r.vecs.emplace_back(grid, std::move(s), field);
    r.blocks.push_back(std::move(block));
  }
  return r;
}

IdempotentNormalization idempotent_normalize(const GenVector& u, const NumericPolicy& policy) {
  const auto& grid = *u.grid();
  policy.validate(grid);
  const auto bad = mixed_scale_indices(u, policy);
  if (!bad.empty()) {
    std::ostringstream os;
    os << "norm neither invertible nor negligible at k =";
    for (auto k : bad) os << ' ' << k;
    throw Error(ErrorKind::MixedScaleGenerator, os.str());
  }
  IdempotentNormalization r;
  r.support = IndexSet(grid.size());
  std::vector<VectorC> w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double n = u[i].norm();
    if (n > 0.0 && n >= std::pow(grid[i], policy.m_inv)) {
      r.support.insert(i);
      w[i] = u[i] / n;
    } else {
      w[i] = VectorC::Zero(u.dim());
    }
  }
  r.w = GenVector(u.grid(), std::move(w), u.field());
  return r;
}

OrthoBasis interleaved_gram_schmidt(const GeneratorSet& g, const NumericPolicy& policy) {
  const auto raw = orthogonalize(g);
  const auto& grid = *g.gens.front().grid();
  policy.validate(grid);
  OrthoBasis B;
  B.blocks = raw.blocks;
  for (std::size_t j = 0; j < raw.vecs.size(); ++j) {
    const GenVector& v = raw.vecs[j];
    IndexSet S(grid.size());
    std::vector<VectorC> w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double n = v[i].norm();
      if (n > 0.0 && n >= std::pow(grid[i], policy.m_inv)) {
        S.insert(i);
        w[i] = v[i] / n;
      } else {
        w[i] = VectorC::Zero(v.dim());
      }
    }
    if (S.empty()) continue;
    B.vecs.emplace_back(v.grid(), std::move(w), v.field());
    B.supports.push_back(std::move(S));
    B.slots.push_back(j);
  }
  return B;
}

void OrthoBasis::validate(const NumericPolicy& policy) const {
  (void)policy;
  if (vecs.size() != supports.size()) throw Error(ErrorKind::InvalidBasis, "supports do not match vectors");
  for (std::size_t a = 0; a < vecs.size(); ++a) {
    require_compatible(vecs.front(), vecs[a]);
    for (std::size_t i = 0; i < vecs[a].size(); ++i) {
      const double n = vecs[a][i].norm();
      const double target = supports[a].contains(i) ? 1.0 : 0.0;
      if (std::abs(n - target) > kBasisTol) {
        std::ostringstream os;
        os << "vector " << a << " has norm " << n << " at k = " << i + 1 << ", expected " << target;
        throw Error(ErrorKind::InvalidBasis, os.str());
      }
      for (std::size_t b = 0; b < a; ++b) {
        if (std::abs(vecs[b][i].dot(vecs[a][i])) > kBasisTol) {
          std::ostringstream os;
          os << "vectors " << b << " and " << a << " are not orthogonal at k = " << i + 1;
          throw Error(ErrorKind::InvalidBasis, os.str());
        }
      }
    }
  }
}

GenVector project_submodule(const OrthoBasis& B, const GenVector& v, const NumericPolicy& policy) {
  B.validate(policy);
  std::vector<VectorC> s(v.size(), VectorC::Zero(v.dim()));
  Field field = v.field();
  for (const auto& w : B.vecs) {
    require_compatible(w, v);
    for (std::size_t i = 0; i < v.size(); ++i) s[i] += w[i].dot(v[i]) * w[i];
  }
  return GenVector(v.grid(), std::move(s), field);
}

BasicOperator projection_operator(const OrthoBasis& B, const NumericPolicy& policy) {
  B.validate(policy);
  if (B.vecs.empty()) throw Error(ErrorKind::InvalidBasis, "empty basis has no ambient dimension");
  const auto& first = B.vecs.front();
  std::vector<MatrixC> s(first.size(), MatrixC::Zero(first.dim(), first.dim()));
  for (const auto& w : B.vecs)
    for (std::size_t i = 0; i < w.size(); ++i) s[i] += w[i] * w[i].adjoint();
  return BasicOperator(first.grid(), std::move(s), first.field());
}

SubmoduleClassification classify_submodule(const GeneratorSet& g, const NumericPolicy& policy) {
  SubmoduleClassification c;
  const auto raw = orthogonalize(g);
  policy.validate(*g.gens.front().grid());
  bool ok = true;
  for (std::size_t j = 0; j < raw.vecs.size(); ++j) {
    try {
      idempotent_normalize(raw.vecs[j], policy);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MixedScaleGenerator) throw;
      ok = false;
      c.diagnostics.mixed_scale.emplace_back(j, mixed_scale_indices(raw.vecs[j], policy));
      c.diagnostics.messages.push_back("generator " + std::to_string(j) + ": " + e.what());
    }
  }
  c.closed_edged = ok;
  if (ok) c.basis = interleaved_gram_schmidt(g, policy);
  return c;
}

BasicFunctional extend_functional(const std::vector<GenScalar>& values, const OrthoBasis& B,
                                  const NumericPolicy& policy) {
  B.validate(policy);
  if (values.size() != B.size()) throw Error(ErrorKind::InvalidBasis, "one functional value per basis vector expected");
  if (B.vecs.empty()) throw Error(ErrorKind::InvalidBasis, "empty basis has no ambient dimension");
  const auto& first = B.vecs.front();
  std::vector<Eigen::RowVectorXcd> rows(first.size(), Eigen::RowVectorXcd::Zero(first.dim()));
  Field field = first.field();
  for (std::size_t j = 0; j < B.size(); ++j) {
    require_same_grid(values[j].grid(), first.grid());
    if (values[j].field() == Field::Complex) field = Field::Complex;
    for (std::size_t i = 0; i < first.size(); ++i) rows[i] += values[j][i] * B.vecs[j][i].adjoint();
  }
  return BasicFunctional(first.grid(), std::move(rows), field);
}

GenScalar beta_net(const GridPtr& grid) {
  return GenScalar::from_function(grid, [](std::size_t i, double eps) {
    const auto m = static_cast<double>((i + 3) / 3);
    return std::pow(eps, m);
  });
}

}  // namespace gennet
