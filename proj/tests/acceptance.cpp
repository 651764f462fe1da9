// Acceptance checks, one line per criterion. Exit status is nonzero when any
// criterion fails or exceeds its time limit.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "gennet/cli.hpp"
#include "gennet/fem.hpp"
#include "gennet/parallel.hpp"
#include "gennet/submodules.hpp"
#include "gennet/variational.hpp"
#include "oracles.hpp"

using namespace gennet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail << "failed: " << what << "; ";
    ok = ok && cond;
  }
};

GridPtr grid24() { return EpsGrid::geometric(); }

void valuation_exactness(Outcome& o) {
  auto g = grid24();
  NumericPolicy p;
  double worst_v = 0, worst_s = 0;
  for (double a : {-3.0, 0.0, 1.0, 2.5}) {
    const auto r = make_power_net(1.0, a, g);
    worst_v = std::max(worst_v, std::abs(valuation_estimate(r, p) - a));
    worst_s = std::max(worst_s, std::abs(sharp_norm(r, p) - std::exp(-a)));
  }
  o.require(worst_v <= 1e-9, "valuation");
  o.require(worst_s <= 1e-9, "sharp norm");
  o.detail << "max valuation error " << worst_v << ", max sharp-norm error " << worst_s;
}

void algebraic_invariants(Outcome& o) {
  auto g = grid24();
  NumericPolicy p;
  std::mt19937_64 rng(2);
  const Complex I(0, 1);
  int bad = 0;
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 8);
    const auto u = oracle::random_vector_net(rng, g, d), v = oracle::random_vector_net(rng, g, d);
    const auto ip = inner(u, v), nu = rnorm(u), nv = rnorm(v), ns = rnorm(u + v), nd = rnorm(u - v);
    const auto uc = oracle::random_complex_net(rng, g, 3), vc = oracle::random_complex_net(rng, g, 3);
    const auto ivc = GenScalar::constant(g, I) * vc;
    const auto q1 = inner(uc + vc, uc + vc), q2 = inner(uc - vc, uc - vc), q3 = inner(uc + ivc, uc + ivc),
               q4 = inner(uc - ivc, uc - ivc), ipc = inner(uc, vc), nuc = rnorm(uc), nvc = rnorm(vc);
    for (std::size_t i = 0; i < 24; ++i) {
      const double prod = nu.re(i) * nv.re(i);
      if (std::abs(ip[i]) > prod * (1 + 1e-12)) ++bad;
      if (ns.re(i) > (nu.re(i) + nv.re(i)) * (1 + 1e-14)) ++bad;
      const double lhs = ns.re(i) * ns.re(i) + nd.re(i) * nd.re(i), rhs = 2 * (nu.re(i) * nu.re(i) + nv.re(i) * nv.re(i));
      if (std::abs(lhs - rhs) > 1e-12 * rhs) ++bad;
      const Complex rec = 0.25 * (q1[i] - q2[i] + I * (q3[i] - q4[i]));
      if (std::abs(rec - ipc[i]) > 1e-10 * std::max(1.0, nuc.re(i) * nvc.re(i))) ++bad;
    }
    const auto r = oracle::random_moderate(rng, g);
    const double s = sharp_norm(r, p);
    if (std::abs(sharp_norm(r * r, p) - s * s) > 1e-6 * std::max(1.0, s * s)) ++bad;
  }
  o.require(bad == 0, "invariant violations");
  o.detail << "200 random pairs per identity, " << bad << " violations";
}

void close_infimum(Outcome& o) {
  auto g = grid24();
  NumericPolicy p;
  const auto T = IndexSet::where(24, [](std::size_t i) { return i % 2 == 0; });
  const auto eT = idempotent(T, g), eC = idempotent(T.complement(), g);
  std::vector<GenScalar> A, B;
  for (int m = 1; m <= static_cast<int>(p.q_neg); ++m) {
    const auto em = make_power_net(1.0, m, g);
    A.push_back(eT + em * eC);
    A.push_back(eC + em * eT);
    B.push_back(em);
  }
  const auto ra = close_infimum_check(GenScalar::zero(g), A, p);
  const auto rb = close_infimum_check(GenScalar::zero(g), B, p);
  o.require(ra.lower_bound && !ra.close, "split fixture");
  o.require(rb.lower_bound && rb.close, "power fixture");
  o.detail << "split fixture close=" << ra.close << ", powers close=" << rb.close;
}

void projection_suite(Outcome& o) {
  auto g = grid24();
  NumericPolicy p;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uw(0.1, 2.0);
  double worst_char = -1e300, worst_nonexp = 0, worst_idem = 0, worst_min = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 8);
    std::vector<Eigen::VectorXd> a(24), b(24);
    std::vector<Eigen::MatrixXd> basis(24);
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng() % static_cast<unsigned>(d));
    for (std::size_t i = 0; i < 24; ++i) {
      a[i] = oracle::random_vector(rng, d);
      b[i] = a[i];
      for (Eigen::Index j = 0; j < d; ++j) b[i](j) += uw(rng);
      basis[i] = oracle::random_matrix(rng, d, r);
    }
    const ConvexSetNet C = t % 3 == 0   ? ConvexSetNet::box(g, a, b)
                           : t % 3 == 1 ? ConvexSetNet::obstacle(GenVector(g, a))
                                        : ConvexSetNet::affine(GenVector(g, a), basis);
    const auto u1 = oracle::random_vector_net(rng, g, d, 0.0), u2 = oracle::random_vector_net(rng, g, d, 0.0);
    const auto v1 = project_point(C, u1, p), v2 = project_point(C, u2, p), vv = project_point(C, v1, p);
    std::vector<GenVector> probes;
    for (int s = 0; s < 10; ++s) probes.push_back(project_point(C, 3.0 * oracle::random_vector_net(rng, g, d, 0.0), p));
    const auto res = characterization_residual(C, u1, v1, probes, p);
    for (std::size_t i = 0; i < 24; ++i) {
      worst_char = std::max(worst_char, res.re(i));
      worst_nonexp = std::max(worst_nonexp, (v1[i] - v2[i]).norm() - (u1[i] - u2[i]).norm());
      worst_idem = std::max(worst_idem, (vv[i] - v1[i]).norm());
      for (const auto& w : probes) worst_min = std::max(worst_min, (u1[i] - v1[i]).norm() - (u1[i] - w[i]).norm());
    }
  }
  o.require(worst_char <= 1e-10, "characterization residual");
  o.require(worst_nonexp <= 1e-12, "nonexpansiveness");
  o.require(worst_idem <= 1e-12, "idempotence");
  o.require(worst_min <= 1e-12, "minimality");
  o.detail << "max residual " << worst_char << ", nonexpansive slack " << worst_nonexp << ", idempotence " << worst_idem
           << ", minimality slack " << worst_min;
}

void gram_schmidt_suite(Outcome& o) {
  auto g = grid24();
  NumericPolicy p;
  std::mt19937_64 rng(5);
  double worst_orth = 0, worst_rec = 0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 8);
    const std::size_t m = 1 + rng() % static_cast<unsigned>(d);
    GeneratorSet G;
    for (std::size_t j = 0; j < m; ++j) G.gens.push_back(oracle::random_vector_net(rng, g, d, 2.0));
    const auto B = interleaved_gram_schmidt(G, p);
    for (std::size_t a = 0; a < B.size(); ++a)
      for (std::size_t b = 0; b < a; ++b)
        for (std::size_t i = 0; i < 24; ++i) worst_orth = std::max(worst_orth, std::abs(B.vecs[a][i].dot(B.vecs[b][i])));
    for (const auto& u : G.gens) {
      const auto rec = project_submodule(B, u, p);
      for (std::size_t i = 0; i < 24; ++i) worst_rec = std::max(worst_rec, (rec[i] - u[i]).norm() / u[i].norm());
    }
  }
  NumericPolicy bp;
  bp.m_inv = 5;
  bool raised = false;
  try {
    idempotent_normalize(beta_net(g) * GenVector::constant(g, Eigen::Vector2d(1, 0)), bp);
  } catch (const Error& e) {
    raised = e.kind() == ErrorKind::MixedScaleGenerator;
  }
  o.require(worst_orth <= 1e-10, "orthogonality");
  o.require(worst_rec <= 1e-10, "reconstruction");
  o.require(raised, "beta fixture");
  o.detail << "orthogonality " << worst_orth << ", reconstruction " << worst_rec << ", beta fixture raised=" << raised;
}

void operator_suite(Outcome& o) {
  auto g = grid24();
  NumericPolicy p;
  std::mt19937_64 rng(6);
  double worst_riesz = 0, worst_adj = 0;
  for (int t = 0; t < 50; ++t) {
    std::vector<Eigen::RowVectorXcd> rows(24);
    for (std::size_t i = 0; i < 24; ++i) {
      const auto re = oracle::random_vector(rng, 4), im = oracle::random_vector(rng, 4);
      rows[i].resize(4);
      for (int j = 0; j < 4; ++j) rows[i](j) = std::pow((*g)[i], -1.0) * Complex(re(j), im(j));
    }
    const BasicFunctional f(g, rows, Field::Complex);
    const auto c = riesz_representer(f);
    for (std::size_t i = 0; i < 24; ++i) {
      const double n = Eigen::JacobiSVD<Eigen::MatrixXcd>(Eigen::MatrixXcd(rows[i])).singularValues()(0);
      worst_riesz = std::max(worst_riesz, std::abs(c[i].norm() - n) / n);
    }
    std::vector<Eigen::MatrixXd> a(24), b(24);
    for (std::size_t i = 0; i < 24; ++i) {
      a[i] = oracle::random_matrix(rng, 3, 4);
      b[i] = oracle::random_matrix(rng, 4, 2);
    }
    const BasicOperator S(g, a), T(g, b);
    const auto lhs = adjoint(S * T), rhs = adjoint(T) * adjoint(S);
    for (std::size_t i = 0; i < 24; ++i)
      worst_adj = std::max(worst_adj, (lhs[i] - rhs[i]).cwiseAbs().maxCoeff() / (1 + lhs[i].cwiseAbs().maxCoeff()));
  }
  const auto R = BasicOperator::from_function(g, [](std::size_t, double th) {
    Eigen::MatrixXd M(2, 2);
    M << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return M;
  });
  const auto Sset = IndexSet::where(24, [](std::size_t i) { return i % 3 != 0; });
  const auto P = BasicOperator::from_function(g, [&](std::size_t i, double) {
    return Eigen::Vector3d(Sset.contains(i) ? 1.0 : 0.0, 1.0, 0.0).asDiagonal().toDenseMatrix();
  });
  const bool unitary = classify_operator(R, p).unitary, projection = classify_operator(P, p).projection;
  o.require(worst_riesz <= 1e-12, "Riesz norm identity");
  o.require(worst_adj <= 1e-12, "adjoint product rule");
  o.require(unitary, "rotation unitary");
  o.require(projection, "diag e_S projection");
  o.detail << "Riesz " << worst_riesz << ", (ST)* defect " << worst_adj << ", rotation unitary=" << unitary
           << ", diag projection=" << projection;
}

Eigen::MatrixXd random_coercive(std::mt19937_64& rng, Eigen::Index d, bool skew) {
  const Eigen::MatrixXd R = oracle::random_matrix(rng, d, d);
  Eigen::MatrixXd A = R * R.transpose() / static_cast<double>(d) + 0.5 * Eigen::MatrixXd::Identity(d, d);
  if (skew) {
    const Eigen::MatrixXd S = oracle::random_matrix(rng, d, d);
    A += 0.5 * (S - S.transpose());
  }
  return A;
}

void contraction_suite(Outcome& o) {
  auto g = grid24();
  NumericPolicy p;
  std::mt19937_64 rng(7);
  double worst_err = 0, worst_ratio = -1;
  int missing = 0;
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 4);
    std::vector<Eigen::MatrixXd> Ts(24);
    std::vector<Eigen::VectorXd> cs(24), lo(24), hi(24);
    for (std::size_t i = 0; i < 24; ++i) {
      Ts[i] = random_coercive(rng, d, t % 2 == 0);
      cs[i] = oracle::random_vector(rng, d, 2.0);
      lo[i] = oracle::random_vector(rng, d, 0.5) - Eigen::VectorXd::Constant(d, 0.5);
      hi[i] = lo[i] + Eigen::VectorXd::Constant(d, 1.0);
    }
    const BasicOperator T(g, Ts);
    const auto C = ConvexSetNet::box(g, lo, hi);
    const auto cert = certify_coercivity(T, p);
    const auto s = vi_solve_contraction(T, GenVector(g, cs), C, cert, p);
    for (std::size_t i = 0; i < 24; ++i) {
      const auto ref = oracle::box_vi_enumeration(Ts[i], cs[i], lo[i], hi[i]);
      if (!ref) {
        ++missing;
        continue;
      }
      worst_err = std::max(worst_err, (s.u.real_sample(i) - *ref).norm());
      const double k = s.contraction_k.re(i), floor = 1e-10 * (1 + s.u[i].norm());
      const auto& st = s.steps[i];
      for (std::size_t n = 1; n < st.size(); ++n)
        if (st[n - 1] >= floor) worst_ratio = std::max(worst_ratio, st[n] / st[n - 1] - k);
    }
  }
  o.require(missing == 0, "enumeration oracle found no solution");
  o.require(worst_err <= 1e-8, "oracle agreement");
  o.require(worst_ratio <= 1e-8, "step ratio");
  o.detail << "max deviation from enumeration " << worst_err << ", max (ratio - k) " << worst_ratio;
}

void obstacle_benchmark(Outcome& o) {
  fem::ProblemSpec s;
  s.grid = grid24();
  s.mesh = fem::Mesh1D{0.0, 1.0, 200};
  s.rhs = fem::CoefficientNet::constant(-8.0);
  s.obstacle = fem::CoefficientNet::constant(-0.75);
  NumericPolicy p;
  const auto r = fem::solve_obstacle(s, p);
  double err = 0;
  for (std::size_t i = 0; i < 24; ++i)
    for (std::size_t j = 0; j < s.mesh.n_nodes(); ++j)
      err = std::max(err, std::abs(r.u[i](static_cast<Eigen::Index>(j)).real() - oracle::obstacle_solution(s.mesh.node(j))));
  const auto c = fem::classical_consistency_check(s, p);
  o.require(err <= 2e-3, "sup error");
  o.require(c.consistent && c.max_deviation <= 1e-10, "classical consistency");
  o.detail << "sup error " << err << ", cross-eps deviation " << c.max_deviation << ", contact ["
           << r.contact_left[0] << ", " << r.contact_right[0] << "]";
}

void dirichlet_benchmarks(Outcome& o) {
  NumericPolicy p;
  auto sup = [](const GenVector& u, const fem::Mesh1D& mesh) {
    double e = 0;
    for (std::size_t j = 0; j < mesh.n_nodes(); ++j)
      e = std::max(e, std::abs(u[0](static_cast<Eigen::Index>(j)).real() - oracle::cosh_solution(mesh.node(j))));
    return e;
  };
  double worst_ratio = 1e300;
  double prev = 0;
  for (std::size_t n : {20u, 40u, 80u, 160u}) {
    fem::ProblemSpec s;
    s.grid = grid24();
    s.mesh = fem::Mesh1D{0.0, 1.0, n};
    s.potential = fem::CoefficientNet::constant(1.0);
    s.rhs = fem::CoefficientNet::constant(1.0);
    const auto r = fem::solve_dirichlet(s, p);
    const double e = sup(r.u, s.mesh);
    if (prev > 0) worst_ratio = std::min(worst_ratio, prev / e);
    prev = e;
  }
  fem::ProblemSpec hd;
  hd.grid = grid24();
  hd.mesh = fem::Mesh1D{-1.0, 1.0, 200};
  hd.diffusion = fem::CoefficientNet(fem::HeavisideNuCoeff{0.0, 1.0, 1.0});
  hd.potential = fem::CoefficientNet(fem::MollifiedMeasureCoeff{{fem::PointMass{0.0, 1.0}}, {}});
  hd.rhs = fem::CoefficientNet::constant(1.0);
  const auto r = fem::solve_dirichlet(hd, p);
  double min_ratio = 1e300, max_res = 0;
  for (std::size_t i = 0; i < 24; ++i) {
    min_ratio = std::min(min_ratio, r.cert.alpha.re(i) / (*hd.grid)[i]);
    max_res = std::max(max_res, r.residual.re(i));
  }
  o.require(worst_ratio >= 3.5, "order-2 convergence");
  o.require(r.cert.valid && r.cert.witness_exponent >= 0 && r.cert.witness_exponent <= 2, "witness");
  o.require(min_ratio >= 0.1, "alpha >= 0.1 eps");
  o.require(max_res <= 1e-10, "residual");
  o.require(r.norm_valuation >= -1.1, "moderateness");
  o.detail << "(a) min error ratio " << worst_ratio << "; (b) min alpha/eps " << min_ratio << ", witness "
           << r.cert.witness_exponent << ", max residual " << max_res << ", H1 valuation " << r.norm_valuation;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void determinism(Outcome& o) {
  const fs::path configs = GENNET_CONFIG_DIR;
  const fs::path root = fs::temp_directory_path() / ("gennet_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const bool before = Parallelism::enabled();
  const unsigned threads_before = Parallelism::threads();
  Parallelism::set_threads(4);
  std::size_t compared = 0;
  const std::vector<std::tuple<std::string, std::string, std::vector<std::string>>> runs{
      {"gennum-check", "powers.json", {"gennum.csv"}},
      {"vi-solve", "box2d.json", {"vi.csv"}},
      {"gram-schmidt", "mixed_generators.json", {"gram_schmidt.csv", "gram_schmidt_basis.json"}},
      {"solve-dirichlet", "heaviside_delta.json", {"solution.csv", "per_eps.csv"}},
      {"solve-obstacle", "obstacle_psi075.json", {"solution.csv", "per_eps.csv"}}};
  for (const auto& [cmd, cfg, files] : runs) {
    std::vector<fs::path> dirs;
    for (const auto& [tag, par] : std::vector<std::pair<std::string, bool>>{{"a", true}, {"b", true}, {"serial", false}}) {
      cli::Options opt;
      opt.config = (configs / cfg).string();
      opt.out = (root / (cmd + "_" + tag)).string();
      opt.parallel = par;
      std::ostringstream so, se;
      const int rc = cli::run(cmd, opt, so, se);
      o.require(rc == 0, cmd + " exit code " + std::to_string(rc));
      dirs.push_back(opt.out);
    }
    for (const auto& f : files) {
      const auto ref = slurp(dirs[0] / f);
      o.require(!ref.empty(), cmd + "/" + f + " empty");
      o.require(ref == slurp(dirs[1] / f), cmd + "/" + f + " differs between runs");
      o.require(ref == slurp(dirs[2] / f), cmd + "/" + f + " differs serial vs parallel");
      ++compared;
    }
  }
  Parallelism::set_enabled(before);
  Parallelism::set_threads(threads_before);
  fs::remove_all(root);
  o.detail << compared << " files compared across 2 parallel runs and 1 serial run (4 worker threads)";
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "valuation exactness", 1, valuation_exactness},
      {2, "algebraic invariants", 10, algebraic_invariants},
      {3, "close-infimum fixture", 1, close_infimum},
      {4, "projection suite", 30, projection_suite},
      {5, "interleaved Gram-Schmidt", 30, gram_schmidt_suite},
      {6, "Riesz/adjoint/classifier", 10, operator_suite},
      {7, "contraction VI solver", 60, contraction_suite},
      {8, "obstacle benchmark", 30, obstacle_benchmark},
      {9, "Dirichlet benchmarks", 60, dirichlet_benchmarks},
      {10, "determinism", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.ok && in_time;
    if (!pass) ++failed;
    std::printf("[%s] %d: %s (%.2f s, limit %.0f s%s) %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.limit_s,
                in_time ? "" : ", over time", o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
