#include "gennet/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>

#include "gennet/io.hpp"
#include "gennet/parallel.hpp"

namespace gennet::cli {

namespace fs = std::filesystem;
using io::format_double;
using io::json;

namespace {

struct Context {
  json config;
  GridPtr grid;
  NumericPolicy policy;
  std::string base_dir;
  fs::path out;
  const Options* options = nullptr;
};

struct Summary {
  json verdicts = json::object();
  json valuations = json::object();
  json values = json::object();
};

using Clock = std::chrono::steady_clock;

const json& require(const json& j, const std::string& key) {
  if (!j.contains(key)) io::config_error("/" + key, "missing required value");
  return j[key];
}

std::string fmt_k(std::size_t i) { return std::to_string(i + 1); }

std::vector<std::string> row_prefix(const Context& c, std::size_t i) { return {fmt_k(i), format_double((*c.grid)[i])}; }

json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

json samples_json(const GenScalar& a) {
  json arr = json::array();
  for (std::size_t i = 0; i < a.size(); ++i) arr.push_back(num(a.re(i)));
  return arr;
}

// ---------------------------------------------------------------- commands

void gennum_check(Context& c, Summary& s) {
  const auto& nets = require(c.config, "nets");
  if (!nets.is_array() || nets.empty()) io::config_error("/nets", "expected a nonempty array");
  std::vector<std::string> names;
  std::vector<GenScalar> values;
  std::vector<std::string> header{"k", "eps"};
  for (std::size_t n = 0; n < nets.size(); ++n) {
    const auto ptr = "/nets/" + std::to_string(n);
    if (!nets[n].contains("name") || !nets[n]["name"].is_string()) io::config_error(ptr + "/name", "expected a string");
    names.push_back(nets[n]["name"].get<std::string>());
    if (!nets[n].contains("net")) io::config_error(ptr + "/net", "missing required value");
    values.push_back(io::read_scalar(nets[n]["net"], c.grid, ptr + "/net"));
    header.push_back(names.back());
  }
  io::CsvWriter csv(header);
  for (std::size_t i = 0; i < c.grid->size(); ++i) {
    auto row = row_prefix(c, i);
    for (const auto& v : values) row.push_back(format_double(v.re(i)));
    csv.add_row(std::move(row));
  }
  csv.write_file((c.out / "gennum.csv").string());
  for (std::size_t n = 0; n < values.size(); ++n) {
    const double val = valuation_estimate(values[n], c.policy);
    s.valuations[names[n]] = num(val);
    s.values[names[n]] = {{"sharp_norm", num(sharp_norm(values[n], c.policy))},
                          {"negligible", is_negligible(values[n], c.policy)},
                          {"moderate", is_moderate(values[n], c.policy)}};
    if (nets[n].contains("expect_valuation")) {
      const double e = nets[n]["expect_valuation"].get<double>();
      s.verdicts[names[n] + ".valuation"] = std::abs(val - e) <= 1e-9;
    }
    if (nets[n].contains("expect_moderate"))
      s.verdicts[names[n] + ".moderate"] = is_moderate(values[n], c.policy) == nets[n]["expect_moderate"].get<bool>();
  }
}

void classify_op(Context& c, Summary& s) {
  const auto T = io::read_operator(require(c.config, "operator"), c.grid, "/operator");
  const auto norms = op_norm_net(T);
  std::vector<std::string> header{"k", "eps", "op_norm", "isometry_defect"};
  const bool square = T.square();
  if (square) header.insert(header.end(), {"co_isometry_defect", "self_adjoint_defect", "idempotency_defect"});
  const auto d = operator_defects(T);
  io::CsvWriter csv(header);
  for (std::size_t i = 0; i < T.size(); ++i) {
    auto row = row_prefix(c, i);
    row.push_back(format_double(norms.re(i)));
    row.push_back(format_double(d.isometry.re(i)));
    if (square) {
      row.push_back(format_double(d.co_isometry.re(i)));
      row.push_back(format_double(d.self_adjoint.re(i)));
      row.push_back(format_double(d.idempotency.re(i)));
    }
    csv.add_row(std::move(row));
  }
  csv.write_file((c.out / "classify_op.csv").string());
  s.values["operator"] = io::write_operator_header(T);
  s.valuations["op_norm"] = num(valuation_estimate(norms, c.policy));
  json flags{{"isometric", is_isometric(T, c.policy)}};
  if (square) {
    const auto f = classify_operator(T, c.policy);
    flags = {{"isometric", f.isometric}, {"unitary", f.unitary}, {"self_adjoint", f.self_adjoint}, {"projection", f.projection}};
  }
  s.values["flags"] = flags;
  if (c.config.contains("expect")) {
    for (auto& [name, want] : c.config["expect"].items()) {
      if (!flags.contains(name)) io::config_error("/expect/" + name, "unknown flag");
      s.verdicts[name] = flags[name] == want;
    }
  }
}

void gram_schmidt(Context& c, Summary& s) {
  const auto& gens = require(c.config, "generators");
  if (!gens.is_array() || gens.empty()) io::config_error("/generators", "expected a nonempty array");
  GeneratorSet g;
  for (std::size_t j = 0; j < gens.size(); ++j) g.gens.push_back(io::read_vector(gens[j], c.grid, "/generators/" + std::to_string(j)));
  try {
    g.validate();
  } catch (const Error& e) {
    io::config_error("/generators", e.what());
  }
  const auto cls = classify_submodule(g, c.policy);
  const auto B = cls.basis ? *cls.basis : interleaved_gram_schmidt(g, c.policy);

  io::CsvWriter csv({"k", "eps", "orthogonality", "reconstruction", "rank"});
  double worst_orth = 0, worst_rec = 0;
  for (std::size_t i = 0; i < c.grid->size(); ++i) {
    double orth = 0, rec = 0;
    std::size_t rank = 0;
    for (std::size_t a = 0; a < B.size(); ++a) {
      if (B.supports[a].contains(i)) ++rank;
      for (std::size_t b = 0; b < a; ++b) orth = std::max(orth, std::abs(B.vecs[b][i].dot(B.vecs[a][i])));
    }
    for (const auto& u : g.gens) {
      VectorC p = VectorC::Zero(u.dim());
      for (const auto& w : B.vecs) p += w[i].dot(u[i]) * w[i];
      const double n = u[i].norm();
      rec = std::max(rec, n > 0 ? (u[i] - p).norm() / n : 0.0);
    }
    worst_orth = std::max(worst_orth, orth);
    worst_rec = std::max(worst_rec, rec);
    auto row = row_prefix(c, i);
    row.push_back(format_double(orth));
    row.push_back(format_double(rec));
    row.push_back(std::to_string(rank));
    csv.add_row(std::move(row));
  }
  csv.write_file((c.out / "gram_schmidt.csv").string());
  std::ofstream((c.out / "gram_schmidt_basis.json").string()) << io::write_basis(B).dump(2) << '\n';

  s.values["closed_edged"] = cls.closed_edged;
  s.values["basis_size"] = B.size();
  s.values["max_orthogonality_residual"] = worst_orth;
  s.values["max_reconstruction_residual"] = worst_rec;
  json diag = json::array();
  for (const auto& [slot, ks] : cls.diagnostics.mixed_scale) diag.push_back({{"generator", slot}, {"k", ks}});
  s.values["mixed_scale"] = diag;
  s.verdicts["orthogonality"] = worst_orth <= 1e-10;
  if (cls.closed_edged) s.verdicts["reconstruction"] = worst_rec <= 1e-10;
  if (c.config.contains("expect_closed_edged"))
    s.verdicts["closed_edged"] = cls.closed_edged == c.config["expect_closed_edged"].get<bool>();
}

void vi_solve(Context& c, Summary& s) {
  const auto T = io::read_operator(require(c.config, "operator"), c.grid, "/operator");
  const auto rhs = io::read_vector(require(c.config, "rhs"), c.grid, "/rhs");
  const auto C = io::read_convex_set(require(c.config, "set"), c.grid, "/set", c.base_dir);
  if (T.rows() != rhs.dim() || C.dim() != rhs.dim()) io::config_error("", "operator, rhs and set dimensions differ");
  const std::string solver = c.config.value("solver", std::string("contraction"));
  if (solver != "contraction" && solver != "minimization") io::config_error("/solver", "expected contraction or minimization");

  const auto cert = certify_coercivity(T, c.policy);
  s.values["witness_exponent"] = cert.witness_exponent;
  s.verdicts["certificate_valid"] = cert.valid;
  if (!cert.valid) throw Error(ErrorKind::CoercivityFailure, "operator is not coercive");
  const auto sol = solver == "contraction" ? vi_solve_contraction(T, rhs, C, cert, c.policy)
                                           : vi_solve_minimization(T, rhs, C, c.policy);

  std::vector<std::string> header{"k", "eps", "alpha", "M", "rho", "k_contraction", "iterations", "residual"};
  for (Eigen::Index j = 0; j < rhs.dim(); ++j) header.push_back("u_" + std::to_string(j + 1));
  io::CsvWriter csv(header);
  for (std::size_t i = 0; i < c.grid->size(); ++i) {
    auto row = row_prefix(c, i);
    for (const auto* net : {&sol.alpha, &sol.M, &sol.rho, &sol.contraction_k}) row.push_back(format_double(net->re(i)));
    row.push_back(std::to_string(sol.iterations[i]));
    row.push_back(format_double(sol.residual.re(i)));
    const Eigen::VectorXd u = sol.u.real_sample(i);
    for (Eigen::Index j = 0; j < u.size(); ++j) row.push_back(format_double(u(j)));
    csv.add_row(std::move(row));
  }
  csv.write_file((c.out / "vi.csv").string());

  // Seeded probes in C for the variational inequality.
  std::mt19937_64 rng(c.options->seed);
  std::normal_distribution<double> nd;
  double worst = 0;
  for (std::size_t i = 0; i < c.grid->size(); ++i) {
    const Eigen::VectorXd u = sol.u.real_sample(i);
    const Eigen::VectorXd r = T.real_sample(i) * u - rhs.real_sample(i);
    const double scale = 1.0 + r.norm() * (1.0 + u.norm());
    for (int p = 0; p < 20; ++p) {
      Eigen::VectorXd v(u.size());
      for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = u(j) + 2.0 * nd(rng);
      v = project_sample(C, i, v, c.policy);
      worst = std::min(worst, r.dot(v - u) / scale);
    }
  }
  s.values["solver"] = solver;
  s.values["min_vi_probe"] = worst;
  s.values["contraction_k"] = samples_json(sol.contraction_k);
  s.values["iterations"] = sol.iterations;
  s.verdicts["converged"] = is_numerically_negligible(sol.residual, c.policy, 1e3);
  s.verdicts["vi_inequality"] = worst >= -1e-8;
}

void write_solution_csv(const Context& c, const fem::ProblemSpec& spec, const GenVector& u) {
  io::CsvWriter csv({"k", "eps", "node_index", "x", "u"});
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t n = 0; n < spec.mesh.n_nodes(); ++n)
      csv.add_row({fmt_k(i), format_double((*c.grid)[i]), std::to_string(n), format_double(spec.mesh.node(n)),
                   format_double(u[i](static_cast<Eigen::Index>(n)).real())});
  csv.write_file((c.out / "solution.csv").string());
}

bool eps_independent(const fem::ProblemSpec& spec) {
  auto const_vec = [](const std::vector<double>& v) { return v.empty() || std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); }); };
  return spec.diffusion.eps_independent() && spec.potential.eps_independent() && spec.rhs.eps_independent() &&
         (!spec.obstacle || spec.obstacle->eps_independent()) && const_vec(spec.g_left) && const_vec(spec.g_right);
}

double cross_eps_deviation(const GenVector& u) {
  double d = 0;
  for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, (u[i] - u[0]).cwiseAbs().maxCoeff());
  return d;
}

void solve_dirichlet_cmd(Context& c, Summary& s) {
  const auto spec = io::read_problem(require(c.config, "problem"), c.grid, "/problem", c.base_dir);
  if (spec.obstacle) io::config_error("/problem/obstacle", "solve-dirichlet takes no obstacle");
  const auto rep = fem::solve_dirichlet(spec, c.policy);
  write_solution_csv(c, spec, rep.u);
  io::CsvWriter csv({"k", "eps", "alpha", "residual", "h1_norm", "under_resolved"});
  double worst = 0;
  for (std::size_t i = 0; i < c.grid->size(); ++i) {
    auto row = row_prefix(c, i);
    row.push_back(format_double(rep.cert.alpha.re(i)));
    row.push_back(format_double(rep.residual.re(i)));
    row.push_back(format_double(rep.h1_norm.re(i)));
    row.push_back(rep.under_resolved.contains(i) ? "1" : "0");
    csv.add_row(std::move(row));
    worst = std::max(worst, rep.residual.re(i));
  }
  csv.write_file((c.out / "per_eps.csv").string());
  s.valuations["h1_norm"] = num(rep.norm_valuation);
  s.valuations["alpha"] = num(valuation_estimate(rep.cert.alpha, c.policy));
  s.values["witness_exponent"] = rep.cert.witness_exponent;
  s.values["poincare_constant"] = rep.poincare_constant;
  s.values["max_residual"] = worst;
  s.values["under_resolved"] = rep.under_resolved.members().size();
  s.verdicts["coercive"] = rep.cert.valid;
  s.verdicts["poincare_bound"] = rep.poincare_bound;
  s.verdicts["residual"] = worst <= 1e-10;
  s.verdicts["moderate"] = rep.moderate;
  if (eps_independent(spec)) s.verdicts["classical_consistency"] = cross_eps_deviation(rep.u) <= 1e-10;
}

void solve_obstacle_cmd(Context& c, Summary& s) {
  const auto spec = io::read_problem(require(c.config, "problem"), c.grid, "/problem", c.base_dir);
  if (!spec.obstacle) io::config_error("/problem/obstacle", "missing required value");
  fem::ObstacleOptions opt;
  opt.energy_metric = c.config.value("energy_metric", false);
  const auto rep = fem::solve_obstacle(spec, c.policy, opt);
  write_solution_csv(c, spec, rep.u);
  io::CsvWriter csv({"k", "eps", "alpha", "M", "rho", "k_contraction", "iterations", "residual", "complementarity_defect",
                     "contact_left", "contact_right"});
  for (std::size_t i = 0; i < c.grid->size(); ++i) {
    auto row = row_prefix(c, i);
    for (const auto* net : {&rep.vi.alpha, &rep.vi.M, &rep.vi.rho, &rep.vi.contraction_k}) row.push_back(format_double(net->re(i)));
    row.push_back(std::to_string(rep.vi.iterations[i]));
    row.push_back(format_double(rep.vi.residual.re(i)));
    row.push_back(format_double(rep.complementarity_defect.re(i)));
    row.push_back(format_double(rep.contact_left[i]));
    row.push_back(format_double(rep.contact_right[i]));
    csv.add_row(std::move(row));
  }
  csv.write_file((c.out / "per_eps.csv").string());
  // The free boundary lies between the last free node and the first contact node.
  const double h = spec.mesh.h();
  s.values["free_boundary_estimate"] = {{"left", num(rep.contact_left[0] - 0.5 * h)}, {"right", num(rep.contact_right[0] + 0.5 * h)}};
  s.values["contraction_k"] = samples_json(rep.vi.contraction_k);
  s.values["iterations"] = rep.vi.iterations;
  s.values["witness_exponent"] = rep.cert.witness_exponent;
  s.verdicts["coercive"] = rep.cert.valid;
  s.verdicts["complementarity"] = rep.complementarity;
  s.verdicts["converged"] = is_numerically_negligible(rep.vi.residual, c.policy, 1e3);
  if (eps_independent(spec)) s.verdicts["classical_consistency"] = cross_eps_deviation(rep.u) <= 1e-10;
}

// ---------------------------------------------------------------- report

int report(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.summaries.empty()) {
    err << "report: at least one summary path is required\n";
    return kUsage;
  }
  json merged = json::array();
  bool all_ok = true;
  out << std::left << std::setw(36) << "summary" << std::setw(18) << "command" << std::setw(28) << "verdict" << "result\n";
  for (const auto& path : o.summaries) {
    json j;
    try {
      std::ifstream in(path);
      if (!in) throw Error(ErrorKind::MalformedSummary, "cannot open " + path);
      j = json::parse(in);
      if (!j.is_object() || !j.contains("command") || !j["command"].is_string() || !j.contains("verdicts") ||
          !j["verdicts"].is_object())
        throw Error(ErrorKind::MalformedSummary, path + ": needs string 'command' and object 'verdicts'");
      for (auto& [k, v] : j["verdicts"].items())
        if (!v.is_boolean()) throw Error(ErrorKind::MalformedSummary, path + ": verdict '" + k + "' is not boolean");
    } catch (const json::exception& e) {
      err << "report: " << to_string(ErrorKind::MalformedSummary) << ": " << path << ": " << e.what() << '\n';
      return kUsage;
    } catch (const Error& e) {
      err << "report: " << e.what() << '\n';
      return kUsage;
    }
    const std::string name = fs::path(path).filename().string();
    for (auto& [k, v] : j["verdicts"].items()) {
      out << std::setw(36) << name << std::setw(18) << j["command"].get<std::string>() << std::setw(28) << k
          << (v.get<bool>() ? "pass" : "FAIL") << '\n';
      all_ok = all_ok && v.get<bool>();
    }
    if (j["verdicts"].empty()) {
      out << std::setw(36) << name << std::setw(18) << j["command"].get<std::string>() << std::setw(28) << "-" << "none\n";
    }
    merged.push_back({{"path", path}, {"summary", j}});
  }
  json result{{"summaries", merged}, {"all_passed", all_ok}};
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    std::ofstream((fs::path(o.out) / "report.json").string()) << result.dump(2) << '\n';
  }
  return all_ok ? kOk : kVerdictFailed;
}

}  // namespace

int run(const std::string& command, const Options& o, std::ostream& out, std::ostream& err) {
  if (command == "report") return report(o, out, err);

  using Handler = void (*)(Context&, Summary&);
  Handler handler = nullptr;
  if (command == "gennum-check") handler = gennum_check;
  else if (command == "classify-op") handler = classify_op;
  else if (command == "gram-schmidt") handler = gram_schmidt;
  else if (command == "vi-solve") handler = vi_solve;
  else if (command == "solve-dirichlet") handler = solve_dirichlet_cmd;
  else if (command == "solve-obstacle") handler = solve_obstacle_cmd;
  if (!handler) {
    err << "unknown command '" << command << "'\n";
    return kUsage;
  }
  if (o.config.empty()) {
    err << command << ": --config is required\n";
    return kUsage;
  }
  if (o.parallel) Parallelism::set_enabled(*o.parallel);

  const auto t0 = Clock::now();
  Context c;
  c.options = &o;
  Summary s;
  json summary{{"command", command}, {"config", o.config}};
  int code = kOk;
  try {
    c.config = io::read_json_file(o.config);
    if (!c.config.is_object()) io::config_error("", "config must be a JSON object");
    c.base_dir = fs::path(o.config).parent_path().string();
    if (c.base_dir.empty()) c.base_dir = ".";
    json grid_j = c.config.value("grid", json::object());
    if (o.grid_K) {
      grid_j.erase("values");
      grid_j["K"] = *o.grid_K;
    }
    c.grid = io::read_grid(grid_j);
    c.policy = io::read_policy(c.config.value("policy", json::object()));
    try {
      c.policy.validate(*c.grid);
    } catch (const Error& e) {
      io::config_error("/policy", e.what());
    }
    c.out = o.out.empty() ? fs::path(".") : fs::path(o.out);
    fs::create_directories(c.out);
    handler(c, s);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) {
      err << command << ": " << e.what() << '\n';
      return kUsage;
    }
    err << command << ": " << e.what() << '\n';
    summary["error"] = e.what();
    s.verdicts["completed"] = false;
    code = kVerdictFailed;
  } catch (const std::exception& e) {
    err << command << ": " << e.what() << '\n';
    return kUsage;
  }
  for (auto& [k, v] : s.verdicts.items())
    if (!v.get<bool>()) code = kVerdictFailed;

  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (c.grid) summary["grid"] = io::write_grid(*c.grid);
  summary["policy"] = io::write_policy(c.policy);
  summary["verdicts"] = s.verdicts;
  summary["valuations"] = s.valuations;
  summary["values"] = s.values;
  summary["timings"] = {{"total_s", secs}, {"threads", Parallelism::enabled() ? Parallelism::threads() : 1u}};
  try {
    std::ofstream((c.out / "summary.json").string()) << summary.dump(2) << '\n';
  } catch (const std::exception& e) {
    err << command << ": cannot write summary: " << e.what() << '\n';
    return kUsage;
  }
  out << command << ": " << (code == kOk ? "all verdicts passed" : "verdict failure") << " (" << (c.out / "summary.json").string()
      << ")\n";
  return code;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Generalized-number nets: variational solvers and checks"};
  app.require_subcommand(1);
  Options o;
  std::string parallel;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment config (JSON)")->required();
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--grid-K", o.grid_K, "Override the number of grid points");
    sub->add_option("--seed", o.seed, "Seed for fixture randomness");
    sub->add_option("--parallel", parallel, "true|false");
  };
  for (const char* name : {"solve-dirichlet", "solve-obstacle", "vi-solve", "classify-op", "gram-schmidt", "gennum-check"})
    add_common(app.add_subcommand(name, std::string("Run ") + name));
  auto* rep = app.add_subcommand("report", "Merge summaries and print the verdict table");
  rep->add_option("summaries", o.summaries, "Summary JSON files");
  rep->add_option("--out", o.out, "Directory for report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (!parallel.empty()) {
    if (parallel == "true" || parallel == "1" || parallel == "on") o.parallel = true;
    else if (parallel == "false" || parallel == "0" || parallel == "off") o.parallel = false;
    else {
      std::cerr << "--parallel expects true or false\n";
      return kUsage;
    }
  }
  const std::string command = app.get_subcommands().front()->get_name();
  if (command == "report" && rep->count("--out") == 0) o.out.clear();
  return run(command, o, std::cout, std::cerr);
}

}  // namespace gennet::cli
