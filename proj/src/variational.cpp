#include "gennet/variational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gennet/parallel.hpp"

namespace gennet {

namespace {

constexpr std::size_t kHardCap = 2'000'000;

std::string at_k(std::size_t i) { return " at k = " + std::to_string(i + 1); }

MatrixC hermitian_part(const MatrixC& A) { return 0.5 * (A + A.adjoint()); }

double min_eig(const MatrixC& S) {
  Eigen::SelfAdjointEigenSolver<MatrixC> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double min_generalized_eig(const MatrixC& S, const MatrixC& G) {
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixC> es(S, G, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::InvalidSpec, "metric is not positive definite");
  return es.eigenvalues()(0);
}

void require_square_compatible(const BasicOperator& T, const GenVector& c) {
  if (!T.square()) throw Error(ErrorKind::DimMismatch, "operator must be square");
  require_same_grid(T.grid(), c.grid());
  if (T.cols() != c.dim()) throw Error(ErrorKind::DimMismatch, "operator and right-hand side differ in dimension");
}

struct MetricConstants {
  double alpha, M;
};

// α and M of T_k in the G-inner product: with G = LLᵀ and Â = L⁻¹TL⁻ᵀ,
// α = λ_min(sym Â) and M = ‖Â‖₂.
MetricConstants metric_constants(const Eigen::MatrixXd& T, const Eigen::MatrixXd* G) {
  Eigen::MatrixXd A = T;
  if (G) {
    Eigen::LLT<Eigen::MatrixXd> llt(*G);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidSpec, "metric is not positive definite");
    const auto L = llt.matrixL();
    A = L.solve(T);
    A = L.solve(A.transpose()).transpose();
  }
  const Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_s(S, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_n(A.transpose() * A, Eigen::EigenvaluesOnly);
  return {es_s.eigenvalues()(0), std::sqrt(std::max(0.0, es_n.eigenvalues()(es_n.eigenvalues().size() - 1)))};
}

double metric_norm(const Eigen::VectorXd& x, const Eigen::MatrixXd* G) {
  return G ? std::sqrt(std::max(0.0, x.dot(*G * x))) : x.norm();
}

void require_valid(const CoercivityCertificate& cert) {
  if (!cert.valid) throw Error(ErrorKind::InvalidCertificate, "coercivity certificate is not valid");
}

void require_real_problem(const BasicOperator& T, const GenVector& c) {
  if (!T.is_real() || !c.is_real()) throw Error(ErrorKind::FieldMismatch, "variational inequalities need real data");
}

}  // namespace

CoercivityCertificate certify_coercivity(const BasicOperator& T, const NumericPolicy& policy,
                                         const BasicOperator* metric) {
  if (!T.square()) throw Error(ErrorKind::DimMismatch, "coercivity needs a square operator");
  if (metric) {
    require_same_grid(T.grid(), metric->grid());
    if (metric->rows() != T.rows() || !metric->square()) throw Error(ErrorKind::DimMismatch, "metric shape mismatch");
  }
  std::vector<double> alpha(T.size());
  parallel_for(T.size(), [&](std::size_t i) {
    const MatrixC S = hermitian_part(T[i]);
    alpha[i] = metric ? min_generalized_eig(S, (*metric)[i]) : min_eig(S);
  });
  CoercivityCertificate cert;
  cert.alpha = GenScalar(T.grid(), alpha);
  const auto v = invertible_wrt(cert.alpha, IndexSet::all(T.size()), policy);
  cert.witness_exponent = v.witness.value_or(-1);
  cert.valid = ge_zero(cert.alpha, policy) && v.invertible;
  return cert;
}

GenVector lax_milgram_solve(const BasicOperator& T, const GenVector& c, const CoercivityCertificate& cert,
                            const NumericPolicy& policy) {
  require_valid(cert);
  require_square_compatible(T, c);
  (void)policy;
  std::vector<VectorC> u(c.size());
  parallel_for(c.size(), [&](std::size_t i) {
    const MatrixC& A = T[i];
    const VectorC& b = c[i];
    const double bn = b.norm();
    if (bn == 0.0) {
      u[i] = VectorC::Zero(b.size());
      return;
    }
    Eigen::PartialPivLU<MatrixC> lu(A);
    VectorC x = lu.solve(b);
    double rel = (A * x - b).norm() / bn;
    for (int it = 0; it < 3 && rel > 1e-14; ++it) {
      x += lu.solve(b - A * x);
      rel = (A * x - b).norm() / bn;
    }
    if (!(rel <= 1e-10)) {
      std::ostringstream os;
      os << "relative residual " << rel << at_k(i);
      throw Error(ErrorKind::SingularSample, os.str());
    }
    u[i] = std::move(x);
  });
  const Field f = (T.is_real() && c.is_real()) ? Field::Real : Field::Complex;
  if (f == Field::Real)
    for (auto& x : u) x = x.real().cast<Complex>();
  return GenVector(c.grid(), std::move(u), f);
}

double energy_sample(const Eigen::MatrixXd& T, const Eigen::VectorXd& c, const Eigen::VectorXd& u) {
  return u.dot(T * u) - 2.0 * c.dot(u);
}

VISolution vi_solve_minimization(const BasicOperator& T, const GenVector& c, const ConvexSetNet& C,
                                 const NumericPolicy& policy) {
  require_square_compatible(T, c);
  require_real_problem(T, c);
  require_same_grid(T.grid(), C.grid());
  if (!classify_operator(T, policy).self_adjoint)
    throw Error(ErrorKind::InvalidSpec, "energy minimization needs a self-adjoint operator");
  const auto cert = certify_coercivity(T, policy);
  require_valid(cert);

  const std::size_t K = c.size();
  VISolution sol;
  std::vector<Eigen::VectorXd> u(K);
  std::vector<double> res(K), Ms(K), alphas(K);
  sol.iterations.assign(K, 0);
  sol.energies.assign(K, {});
  parallel_for(K, [&](std::size_t i) {
    const Eigen::MatrixXd A = 0.5 * (T.real_sample(i) + T.real_sample(i).transpose());
    const Eigen::VectorXd b = c.real_sample(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    const double M = es.eigenvalues().maxCoeff();
    alphas[i] = es.eigenvalues().minCoeff();
    Ms[i] = M;
    if (alphas[i] <= 0) throw Error(ErrorKind::InvalidCertificate, "nonpositive coercivity constant" + at_k(i));
    const double s = 1.0 / (2.0 * M);
    const double tol = policy.tol_abs * (1.0 + b.norm());
    Eigen::VectorXd x = project_sample(C, i, Eigen::VectorXd::Zero(b.size()), policy);
    auto& hist = sol.energies[i];
    hist.push_back(energy_sample(A, b, x));
    const std::size_t max_iter = 200000;
    std::size_t it = 0;
    for (;; ++it) {
      const Eigen::VectorXd g = 2.0 * (A * x - b);
      const double pg = (project_sample(C, i, x - g, policy) - x).norm();
      if (pg <= tol) break;
      if (it == max_iter) {
        std::ostringstream os;
        os << "projected gradient " << pg << " after " << max_iter << " iterations" << at_k(i);
        throw Error(ErrorKind::NoConvergence, os.str());
      }
      const Eigen::VectorXd d = project_sample(C, i, x - s * g, policy) - x;
      const double curv = d.dot(A * d);
      const double slope = g.dot(d);
      double t = curv > 0 ? -slope / (2.0 * curv) : 1.0;
      t = std::clamp(t, 0.0, 1.0);
      const Eigen::VectorXd next = x + t * d;
      if ((next - x).norm() == 0.0) break;
      x = next;
      hist.push_back(energy_sample(A, b, x));
    }
    sol.iterations[i] = it;
    res[i] = (project_sample(C, i, x - 2.0 * (A * x - b), policy) - x).norm();
    u[i] = std::move(x);
  });
  sol.u = GenVector(c.grid(), u);
  sol.residual = GenScalar(c.grid(), res);
  sol.M = GenScalar(c.grid(), Ms);
  sol.alpha = GenScalar(c.grid(), alphas);
  sol.rho = GenScalar::zero(c.grid());
  sol.contraction_k = GenScalar::zero(c.grid());
  return sol;
}

VISolution vi_solve_contraction(const BasicOperator& T, const GenVector& c, const ConvexSetNet& C,
                                const CoercivityCertificate& cert, const NumericPolicy& policy,
                                const ContractionOptions& options) {
  require_valid(cert);
  require_square_compatible(T, c);
  require_real_problem(T, c);
  require_same_grid(T.grid(), C.grid());
  if (C.dim() != c.dim()) throw Error(ErrorKind::DimMismatch, "set and right-hand side differ in dimension");
  if (options.metric) require_same_grid(T.grid(), options.metric->grid());
  if (options.start) require_compatible(*options.start, c);

  const std::size_t K = c.size();
  VISolution sol;
  std::vector<Eigen::VectorXd> u(K);
  std::vector<double> res(K), ks(K), rhos(K), Ms(K), alphas(K);
  sol.iterations.assign(K, 0);
  sol.steps.assign(K, {});
  parallel_for(K, [&](std::size_t i) {
    const Eigen::MatrixXd A = T.real_sample(i);
    const Eigen::VectorXd b = c.real_sample(i);
    Eigen::MatrixXd Gm;
    const Eigen::MatrixXd* G = nullptr;
    if (options.metric) {
      Gm = options.metric->real_sample(i);
      G = &Gm;
    }
    const auto mc = metric_constants(A, G);
    if (!(mc.alpha > 0.0) || !(mc.M > 0.0))
      throw Error(ErrorKind::InvalidCertificate, "nonpositive coercivity constant" + at_k(i));
    const double rho = mc.alpha / (mc.M * mc.M);
    const double k = std::sqrt(std::max(0.0, 1.0 - (mc.alpha * mc.alpha) / (mc.M * mc.M)));
    alphas[i] = mc.alpha;
    Ms[i] = mc.M;
    rhos[i] = rho;
    ks[i] = k;

    Eigen::LLT<Eigen::MatrixXd> gllt;
    if (G) gllt.compute(*G);
    auto map = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      const Eigen::VectorXd r = A * x - b;
      if (G) return project_sample_metric(C, i, x - rho * gllt.solve(r), *G, policy);
      return project_sample(C, i, x - rho * r, policy);
    };

    Eigen::VectorXd x;
    if (options.start) {
      x = options.start->real_sample(i);
    } else if (G) {
      x = project_sample_metric(C, i, Eigen::VectorXd::Zero(b.size()), *G, policy);
    } else {
      x = project_sample(C, i, Eigen::VectorXd::Zero(b.size()), policy);
    }

    auto& steps = sol.steps[i];
    Eigen::VectorXd next = map(x);
    double step = metric_norm(next - x, G);
    const double scale = std::max(1.0, metric_norm(x, G));
    const double thr = policy.tol_abs * scale * (1.0 - k) / std::max(k, policy.tol_abs);

    std::size_t budget = options.max_iterations;
    if (budget == 0) {
      double need = 0;
      if (k > policy.tol_abs) {
        need = std::ceil(std::log(policy.tol_abs) / std::log(k));
        if (step > thr) need += std::ceil(std::log(thr / step) / std::log(k));
      }
      budget = static_cast<std::size_t>(std::min<double>(need + 100.0, static_cast<double>(kHardCap)));
    }

    std::size_t it = 1;
    steps.push_back(step);
    while (step > thr) {
      if (it >= budget) {
        std::ostringstream os;
        os << "step " << step << " above " << thr << " after " << it << " iterations (k = " << k << ")" << at_k(i);
        throw Error(ErrorKind::IterationBudgetExceeded, os.str());
      }
      x = std::move(next);
      next = map(x);
      step = metric_norm(next - x, G);
      steps.push_back(step);
      ++it;
    }
    x = std::move(next);
    res[i] = metric_norm(map(x) - x, G);
    sol.iterations[i] = it;
    u[i] = std::move(x);
  });
  sol.u = GenVector(c.grid(), u);
  sol.residual = GenScalar(c.grid(), res);
  sol.contraction_k = GenScalar(c.grid(), ks);
  sol.rho = GenScalar(c.grid(), rhos);
  sol.M = GenScalar(c.grid(), Ms);
  sol.alpha = GenScalar(c.grid(), alphas);
  return sol;
}

}  // namespace gennet
