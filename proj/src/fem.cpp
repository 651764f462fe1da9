#include "gennet/fem.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "gennet/parallel.hpp"

namespace gennet::fem {

namespace {

constexpr std::array<double, 3> kGaussS{-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGaussW{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

double bump(double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

double density_convolution(const DensityBlock& d, double x, double eps) {
  const double lo = std::max(d.a, x - eps), hi = std::min(d.b, x + eps);
  if (!(hi > lo)) return 0.0;
  if (lo == x - eps && hi == x + eps) return d.c;
  using boost::math::quadrature::gauss_kronrod;
  const double t0 = (lo - x) / eps, t1 = (hi - x) / eps;
  return d.c * mollifier_constant() * gauss_kronrod<double, 31>::integrate(bump, t0, t1, 20, 1e-14);
}

double measure_value(const MollifiedMeasureCoeff& m, double x, double eps) {
  double v = 0.0;
  for (const auto& pm : m.masses) v += pm.weight * mollifier_eval(x, eps, pm.x);
  for (const auto& d : m.density) v += density_convolution(d, x, eps);
  return v;
}

double interpolate(const std::vector<double>& nodal, double x, const Mesh1D& mesh) {
  const double t = (x - mesh.x_left) / mesh.h();
  const auto e = static_cast<std::size_t>(std::clamp(std::floor(t), 0.0, static_cast<double>(mesh.n_elems - 1)));
  const double s = t - static_cast<double>(e);
  return (1.0 - s) * nodal[e] + s * nodal[e + 1];
}

template <class Fn>
void for_each_gauss_point(const Mesh1D& mesh, Fn fn) {
  const double h = mesh.h();
  for (std::size_t e = 0; e < mesh.n_elems; ++e) {
    const double xm = mesh.node(e) + 0.5 * h;
    for (std::size_t q = 0; q < 3; ++q) {
      const double s = kGaussS[q];
      fn(e, xm + 0.5 * h * s, 0.5 * h * kGaussW[q], 0.5 * (1.0 - s), 0.5 * (1.0 + s));
    }
  }
}

Eigen::MatrixXd restrict_interior(const Eigen::MatrixXd& full) {
  const auto n = full.rows() - 2;
  return full.block(1, 1, n, n);
}

IndexSet under_resolved_set(const ProblemSpec& spec) {
  const bool mollified = spec.diffusion.is_mollified() || spec.potential.is_mollified() || spec.rhs.is_mollified();
  const double h = spec.mesh.h();
  return IndexSet::where(spec.grid->size(), [&](std::size_t i) { return mollified && (*spec.grid)[i] < 2.0 * h; });
}

std::string at_k(std::size_t i) { return " at k = " + std::to_string(i + 1); }

GenVector full_solution(const ProblemSpec& spec, const std::vector<Eigen::VectorXd>& lifting, const GenVector& w) {
  std::vector<Eigen::VectorXd> u(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    u[i] = lifting[i];
    u[i].segment(1, static_cast<Eigen::Index>(spec.mesh.n_interior())) += w.real_sample(i);
  }
  return GenVector(spec.grid, u);
}

}  // namespace

void Mesh1D::validate() const {
  if (n_elems < 4) throw Error(ErrorKind::InvalidSpec, "mesh needs at least 4 elements");
  if (!(x_right > x_left)) throw Error(ErrorKind::InvalidSpec, "mesh interval must have x_right > x_left");
}

double mollifier_constant() {
  static const double Z = [] {
    using boost::math::quadrature::gauss_kronrod;
    const double mass = gauss_kronrod<double, 31>::integrate(bump, -1.0, 1.0, 20, 1e-14);
    return 1.0 / mass;
  }();
  return Z;
}

double mollifier_eval(double x, double eps, double center) {
  if (!(eps > 0)) throw Error(ErrorKind::InvalidSpec, "mollifier width must be positive");
  return mollifier_constant() * bump((x - center) / eps) / eps;
}

bool CoefficientNet::eps_independent() const {
  return std::visit(
      [](const auto& d) -> bool {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantCoeff>) {
          return true;
        } else if constexpr (std::is_same_v<T, HeavisideNuCoeff>) {
          return d.p == 0.0;
        } else if constexpr (std::is_same_v<T, MollifiedMeasureCoeff>) {
          return d.masses.empty() && d.density.empty();
        } else {
          return std::all_of(d.nodal.begin(), d.nodal.end(), [&](const auto& v) { return v == d.nodal.front(); });
        }
      },
      data_);
}

double CoefficientNet::eval(double x, std::size_t k, double eps, const Mesh1D& mesh) const {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantCoeff>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, HeavisideNuCoeff>) {
          return x > d.split ? 1.0 : d.coeff * std::pow(eps, d.p);
        } else if constexpr (std::is_same_v<T, MollifiedMeasureCoeff>) {
          return measure_value(d, x, eps);
        } else {
          return interpolate(d.nodal.at(k), x, mesh);
        }
      },
      data_);
}

std::vector<double> mollify_measure(const MollifiedMeasureCoeff& measure, double eps, const Mesh1D& mesh) {
  for (const auto& pm : measure.masses)
    if (pm.weight < 0) throw Error(ErrorKind::InvalidSpec, "point mass weights must be nonnegative");
  for (const auto& d : measure.density)
    if (d.c < 0) throw Error(ErrorKind::InvalidSpec, "density must be nonnegative");
  std::vector<double> out;
  out.reserve(3 * mesh.n_elems);
  for_each_gauss_point(mesh, [&](std::size_t, double x, double, double, double) { out.push_back(measure_value(measure, x, eps)); });
  return out;
}

void ProblemSpec::validate() const {
  if (!grid) throw Error(ErrorKind::InvalidSpec, "problem has no grid");
  mesh.validate();
  const std::size_t K = grid->size();
  auto check_len = [&](const std::vector<double>& g, const char* name) {
    if (!g.empty() && g.size() != K) throw Error(ErrorKind::InvalidSpec, std::string(name) + " needs one value per grid point");
  };
  check_len(g_left, "g_left");
  check_len(g_right, "g_right");
  auto check_tab = [&](const CoefficientNet& c, const char* name) {
    if (const auto* t = std::get_if<TabulatedCoeff>(&c.data())) {
      if (t->nodal.size() != K) throw Error(ErrorKind::InvalidSpec, std::string(name) + " table needs K rows");
      for (const auto& row : t->nodal)
        if (row.size() != mesh.n_nodes()) throw Error(ErrorKind::InvalidSpec, std::string(name) + " table needs one value per node");
    }
  };
  check_tab(diffusion, "diffusion");
  check_tab(potential, "potential");
  check_tab(rhs, "rhs");
  if (obstacle) check_tab(*obstacle, "obstacle");
  for (const auto& pl : point_loads)
    if (pl.x < mesh.x_left || pl.x > mesh.x_right) throw Error(ErrorKind::InvalidSpec, "point load outside the domain");
  for (std::size_t i = 0; i < K; ++i) {
    const double gl = boundary_left(i), gr = boundary_right(i);
    if (!std::isfinite(gl) || !std::isfinite(gr) || std::abs(gl) > std::pow((*grid)[i], -20.0))
      throw Error(ErrorKind::InvalidSpec, "boundary values must be finite and moderate");
  }
}

Assembly assemble(const ProblemSpec& spec, std::size_t k) {
  spec.validate();
  const Mesh1D& mesh = spec.mesh;
  const double eps = (*spec.grid)[k];
  const auto N = static_cast<Eigen::Index>(mesh.n_nodes());
  const double h = mesh.h();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  Eigen::VectorXd F = Eigen::VectorXd::Zero(N);
  for_each_gauss_point(mesh, [&](std::size_t e, double x, double w, double n0, double n1) {
    const double a = spec.diffusion.eval(x, k, eps, mesh);
    const double a0 = spec.potential.eval(x, k, eps, mesh);
    const double f = spec.rhs.eval(x, k, eps, mesh);
    const auto j = static_cast<Eigen::Index>(e);
    const double kd = a * w / (h * h);
    A(j, j) += kd + a0 * w * n0 * n0;
    A(j + 1, j + 1) += kd + a0 * w * n1 * n1;
    A(j, j + 1) += -kd + a0 * w * n0 * n1;
    A(j + 1, j) += -kd + a0 * w * n0 * n1;
    F(j) += f * w * n0;
    F(j + 1) += f * w * n1;
  });
  for (const auto& pl : spec.point_loads) {
    const double t = (pl.x - mesh.x_left) / h;
    const auto e = static_cast<Eigen::Index>(std::clamp(std::floor(t), 0.0, static_cast<double>(mesh.n_elems - 1)));
    const double s = t - static_cast<double>(e);
    F(e) += pl.weight * (1.0 - s);
    F(e + 1) += pl.weight * s;
  }
  Assembly out;
  const double gl = spec.boundary_left(k), gr = spec.boundary_right(k);
  out.lifting.resize(N);
  for (Eigen::Index j = 0; j < N; ++j) out.lifting(j) = gl + (gr - gl) * static_cast<double>(j) / static_cast<double>(N - 1);
  const Eigen::VectorXd Fl = F - A * out.lifting;
  out.load = Fl.segment(1, N - 2);
  out.matrix = restrict_interior(A);
  out.full_matrix = std::move(A);
  return out;
}

Eigen::MatrixXd unit_stiffness(const Mesh1D& mesh, bool interior_only) {
  mesh.validate();
  const auto N = static_cast<Eigen::Index>(mesh.n_nodes());
  const double h = mesh.h();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
  for (Eigen::Index e = 0; e + 1 < N; ++e) {
    K(e, e) += 1.0 / h;
    K(e + 1, e + 1) += 1.0 / h;
    K(e, e + 1) -= 1.0 / h;
    K(e + 1, e) -= 1.0 / h;
  }
  return interior_only ? restrict_interior(K) : K;
}

Eigen::MatrixXd h1_gram(const Mesh1D& mesh, bool interior_only) {
  const auto N = static_cast<Eigen::Index>(mesh.n_nodes());
  const double h = mesh.h();
  Eigen::MatrixXd G = unit_stiffness(mesh, false);
  for (Eigen::Index e = 0; e + 1 < N; ++e) {
    G(e, e) += h / 3.0;
    G(e + 1, e + 1) += h / 3.0;
    G(e, e + 1) += h / 6.0;
    G(e + 1, e) += h / 6.0;
  }
  return interior_only ? restrict_interior(G) : G;
}

CoefficientRange diffusion_range(const ProblemSpec& spec, std::size_t k) {
  const double eps = (*spec.grid)[k];
  CoefficientRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for_each_gauss_point(spec.mesh, [&](std::size_t, double x, double, double, double) {
    const double a = spec.diffusion.eval(x, k, eps, spec.mesh);
    r.min = std::min(r.min, a);
    r.max = std::max(r.max, a);
  });
  return r;
}

namespace {

struct AssembledNet {
  BasicOperator T;
  GenVector c;
  std::vector<Eigen::VectorXd> lifting;
};

AssembledNet assemble_all(const ProblemSpec& spec) {
  spec.validate();
  const std::size_t K = spec.grid->size();
  std::vector<Eigen::MatrixXd> mats(K);
  std::vector<Eigen::VectorXd> loads(K), lifts(K);
  parallel_for(K, [&](std::size_t i) {
    auto a = assemble(spec, i);
    mats[i] = std::move(a.matrix);
    loads[i] = std::move(a.load);
    lifts[i] = std::move(a.lifting);
  });
  return {BasicOperator(spec.grid, mats), GenVector(spec.grid, loads), std::move(lifts)};
}

void require_positive_diffusion(const ProblemSpec& spec) {
  for (std::size_t i = 0; i < spec.grid->size(); ++i) {
    const auto r = diffusion_range(spec, i);
    if (!(r.min > 0.0)) {
      std::ostringstream os;
      os << "diffusion minimum " << r.min << at_k(i);
      throw Error(ErrorKind::CoercivityFailure, os.str());
    }
  }
}

void require_valid_cert(const CoercivityCertificate& cert) {
  if (!cert.valid) {
    std::ostringstream os;
    os << "coercivity constant is not invertible (witness " << cert.witness_exponent << ")";
    throw Error(ErrorKind::CoercivityFailure, os.str());
  }
}

}  // namespace

DirichletReport solve_dirichlet(const ProblemSpec& spec, const NumericPolicy& policy) {
  if (spec.obstacle) throw Error(ErrorKind::InvalidSpec, "solve_dirichlet does not take an obstacle");
  auto net = assemble_all(spec);
  require_positive_diffusion(spec);
  const std::size_t K = spec.grid->size();
  const Eigen::MatrixXd G = h1_gram(spec.mesh);
  const auto Gnet = BasicOperator::constant(spec.grid, G);

  DirichletReport rep;
  rep.cert = certify_coercivity(net.T, policy, &Gnet);
  require_valid_cert(rep.cert);

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(unit_stiffness(spec.mesh), G, Eigen::EigenvaluesOnly);
  rep.poincare_constant = es.eigenvalues()(0);
  rep.poincare_bound = true;
  for (std::size_t i = 0; i < K; ++i) {
    const double bound = diffusion_range(spec, i).min * rep.poincare_constant;
    if (rep.cert.alpha.re(i) < bound * (1.0 - 1e-8)) rep.poincare_bound = false;
  }
  if (!rep.poincare_bound) throw Error(ErrorKind::CoercivityFailure, "coercivity constant below the Poincare bound");

  const GenVector w = lax_milgram_solve(net.T, net.c, rep.cert, policy);
  rep.residual = GenScalar::from_function(spec.grid, [&](std::size_t i, double) {
    const double bn = net.c[i].norm();
    const double r = (net.T[i] * w[i] - net.c[i]).norm();
    return bn > 0 ? r / bn : r;
  });
  rep.u = full_solution(spec, net.lifting, w);
  const Eigen::MatrixXd Gfull = h1_gram(spec.mesh, false);
  rep.h1_norm = GenScalar::from_function(spec.grid, [&](std::size_t i, double) {
    const Eigen::VectorXd u = rep.u.real_sample(i);
    return std::sqrt(std::max(0.0, u.dot(Gfull * u)));
  });
  rep.norm_valuation = valuation_estimate(rep.h1_norm, policy);
  rep.moderate = is_moderate(rep.h1_norm, policy);
  rep.under_resolved = under_resolved_set(spec);
  return rep;
}

ObstacleReport solve_obstacle(const ProblemSpec& spec, const NumericPolicy& policy, const ObstacleOptions& options) {
  if (!spec.obstacle) throw Error(ErrorKind::InvalidSpec, "solve_obstacle needs an obstacle");
  auto net = assemble_all(spec);
  require_positive_diffusion(spec);
  const std::size_t K = spec.grid->size();
  const std::size_t n = spec.mesh.n_interior();
  const auto ni = static_cast<Eigen::Index>(n);

  std::vector<Eigen::VectorXd> psi(K), lower(K);
  for (std::size_t i = 0; i < K; ++i) {
    const double eps = (*spec.grid)[i];
    psi[i].resize(static_cast<Eigen::Index>(spec.mesh.n_nodes()));
    for (std::size_t j = 0; j < spec.mesh.n_nodes(); ++j)
      psi[i](static_cast<Eigen::Index>(j)) = spec.obstacle->eval(spec.mesh.node(j), i, eps, spec.mesh);
    const double tol = 1e-12 * (1.0 + std::abs(psi[i](0)) + std::abs(psi[i](ni + 1)));
    if (psi[i](0) > spec.boundary_left(i) + tol || psi[i](ni + 1) > spec.boundary_right(i) + tol)
      throw Error(ErrorKind::InvalidSpec, "obstacle exceeds the boundary values" + at_k(i));
    lower[i] = psi[i].segment(1, ni) - net.lifting[i].segment(1, ni);
  }
  const auto C = ConvexSetNet::obstacle(GenVector(spec.grid, lower));

  BasicOperator metric;
  if (options.energy_metric) {
    if (!classify_operator(net.T, policy).self_adjoint)
      throw Error(ErrorKind::InvalidSpec, "energy metric needs a symmetric form");
    metric = net.T;
  } else {
    metric = BasicOperator::constant(spec.grid, h1_gram(spec.mesh));
  }

  ObstacleReport rep;
  rep.cert = certify_coercivity(net.T, policy, &metric);
  require_valid_cert(rep.cert);
  ContractionOptions copt;
  copt.metric = &metric;
  rep.vi = vi_solve_contraction(net.T, net.c, C, rep.cert, policy, copt);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.contact_left.assign(K, nan);
  rep.contact_right.assign(K, nan);
  std::vector<double> defect(K, 0.0);
  constexpr double kGap = 1e-9, kRes = 1e-8;
  for (std::size_t i = 0; i < K; ++i) {
    const Eigen::VectorXd w = rep.vi.u.real_sample(i);
    const Eigen::VectorXd r = net.T.real_sample(i) * w - net.c.real_sample(i);
    double d = 0.0;
    for (Eigen::Index j = 0; j < ni; ++j) {
      const double gap = w(j) - lower[i](j);
      d = std::max({d, -gap, -r(j)});
      if (gap > kGap) {
        d = std::max(d, std::abs(r(j)));
      } else {
        const double x = spec.mesh.node(static_cast<std::size_t>(j) + 1);
        if (std::isnan(rep.contact_left[i])) rep.contact_left[i] = x;
        rep.contact_right[i] = x;
      }
    }
    defect[i] = d;
  }
  rep.complementarity_defect = GenScalar(spec.grid, defect);
  rep.complementarity = std::all_of(defect.begin(), defect.end(), [&](double d) { return d <= kRes; });
  rep.u = full_solution(spec, net.lifting, rep.vi.u);
  rep.psi = GenVector(spec.grid, psi);
  rep.under_resolved = under_resolved_set(spec);
  return rep;
}

ConsistencyReport classical_consistency_check(const ProblemSpec& spec, const NumericPolicy& policy) {
  const GenVector u = spec.obstacle ? solve_obstacle(spec, policy).u : solve_dirichlet(spec, policy).u;
  ConsistencyReport rep;
  rep.deviation.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    rep.deviation[i] = (u[i] - u[0]).cwiseAbs().maxCoeff();
    rep.max_deviation = std::max(rep.max_deviation, rep.deviation[i]);
  }
  rep.consistent = rep.max_deviation <= 1e-10;
  return rep;
}

}  // namespace gennet::fem
