#include "gennet/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace gennet::io {

void config_error(const std::string& pointer, const std::string& message) {
  throw Error(ErrorKind::ConfigInvalid, (pointer.empty() ? std::string("/") : pointer) + ": " + message);
}

namespace {

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

const json& get(const json& j, const std::string& key, const std::string& ptr) {
  if (!j.is_object()) config_error(ptr, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) config_error(child(ptr, key), "missing required value");
  return *it;
}

double as_double(const json& j, const std::string& ptr) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  config_error(ptr, "expected a number");
}

double finite_double(const json& j, const std::string& ptr) {
  const double v = as_double(j, ptr);
  if (!std::isfinite(v)) config_error(ptr, "expected a finite number");
  return v;
}

std::size_t as_size(const json& j, const std::string& ptr) {
  if (!j.is_number_integer() || j.get<long long>() < 0) config_error(ptr, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

double opt_double(const json& j, const std::string& key, double fallback, const std::string& ptr) {
  auto it = j.find(key);
  return it == j.end() ? fallback : finite_double(*it, child(ptr, key));
}

const json& as_array(const json& j, const std::string& ptr) {
  if (!j.is_array()) config_error(ptr, "expected an array");
  return j;
}

Eigen::VectorXd read_dvec(const json& j, const std::string& ptr) {
  as_array(j, ptr);
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = as_double(j[i], child(ptr, i));
  return v;
}

Eigen::MatrixXd read_dmat(const json& j, const std::string& ptr) {
  as_array(j, ptr);
  if (j.empty()) config_error(ptr, "matrix needs at least one row");
  const std::size_t cols = as_array(j[0], child(ptr, std::size_t{0})).size();
  Eigen::MatrixXd M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = read_dvec(j[r], child(ptr, r));
    if (static_cast<std::size_t>(row.size()) != cols) config_error(child(ptr, r), "ragged matrix row");
    M.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return M;
}

template <class T>
std::vector<T> per_sample(const json& samples, const GridPtr& grid, const std::string& ptr,
                          T (*reader)(const json&, const std::string&)) {
  as_array(samples, ptr);
  if (samples.size() != grid->size()) config_error(ptr, "expected " + std::to_string(grid->size()) + " samples");
  std::vector<T> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out.push_back(reader(samples[i], child(ptr, i)));
  return out;
}

}  // namespace

GridPtr read_grid(const json& j, const std::string& ptr) {
  try {
    if (j.contains("values")) {
      const auto v = read_dvec(j["values"], child(ptr, "values"));
      return EpsGrid::from_values(std::vector<double>(v.data(), v.data() + v.size()));
    }
    const std::size_t K = j.contains("K") ? as_size(j["K"], child(ptr, "K")) : 24;
    const double base = opt_double(j, "base", 0.5, ptr);
    return EpsGrid::geometric(K, base);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    config_error(ptr, e.what());
  }
}

json write_grid(const EpsGrid& grid) {
  if (std::isnan(grid.base())) return json{{"values", std::vector<double>(grid.values().begin(), grid.values().end())}};
  return json{{"K", grid.size()}, {"base", grid.base()}};
}

NumericPolicy read_policy(const json& j, const std::string& ptr) {
  NumericPolicy p;
  if (j.is_null()) return p;
  if (!j.is_object()) config_error(ptr, "expected an object");
  p.q_neg = opt_double(j, "q_neg", p.q_neg, ptr);
  p.m_inv = opt_double(j, "m_inv", p.m_inv, ptr);
  p.N_mod = opt_double(j, "N_mod", p.N_mod, ptr);
  if (j.contains("tail")) p.tail = as_size(j["tail"], child(ptr, "tail"));
  p.tol_abs = opt_double(j, "tol_abs", p.tol_abs, ptr);
  return p;
}

json write_policy(const NumericPolicy& p) {
  return json{{"q_neg", p.q_neg}, {"m_inv", p.m_inv}, {"N_mod", p.N_mod}, {"tail", p.tail}, {"tol_abs", p.tol_abs}};
}

GenScalar read_scalar(const json& j, const GridPtr& grid, const std::string& ptr) {
  if (j.is_number()) return GenScalar::constant(grid, j.get<double>());
  if (!j.is_object()) config_error(ptr, "expected a number or an object");
  if (j.contains("constant")) return GenScalar::constant(grid, finite_double(j["constant"], child(ptr, "constant")));
  if (j.contains("samples")) {
    const auto v = read_dvec(j["samples"], child(ptr, "samples"));
    if (static_cast<std::size_t>(v.size()) != grid->size())
      config_error(child(ptr, "samples"), "expected " + std::to_string(grid->size()) + " samples");
    return GenScalar(grid, std::vector<double>(v.data(), v.data() + v.size()));
  }
  if (j.contains("terms")) {
    const auto& terms = as_array(j["terms"], child(ptr, "terms"));
    GenScalar s = GenScalar::zero(grid);
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const auto p = child(child(ptr, "terms"), t);
      s += make_power_net(finite_double(get(terms[t], "c", p), child(p, "c")), finite_double(get(terms[t], "a", p), child(p, "a")), grid);
    }
    return s;
  }
  config_error(ptr, "expected one of constant, samples, terms");
}

GenVector read_vector(const json& j, const GridPtr& grid, const std::string& ptr) {
  if (!j.is_object()) config_error(ptr, "expected an object");
  if (j.contains("constant")) return GenVector::constant(grid, read_dvec(j["constant"], child(ptr, "constant")));
  if (j.contains("samples")) {
    auto s = per_sample<Eigen::VectorXd>(j["samples"], grid, child(ptr, "samples"), &read_dvec);
    const auto dim = s.front().size();
    if (j.contains("dim") && as_size(j["dim"], child(ptr, "dim")) != static_cast<std::size_t>(dim))
      config_error(child(ptr, "dim"), "dim differs from sample length");
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i].size() != dim) config_error(child(child(ptr, "samples"), i), "sample length differs from dim");
    return GenVector(grid, s);
  }
  if (j.contains("terms")) {
    const auto& terms = as_array(j["terms"], child(ptr, "terms"));
    if (terms.empty()) config_error(child(ptr, "terms"), "needs at least one term");
    std::optional<GenVector> acc;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const auto p = child(child(ptr, "terms"), t);
      const double c = finite_double(get(terms[t], "c", p), child(p, "c"));
      const double a = finite_double(get(terms[t], "a", p), child(p, "a"));
      const auto v = read_dvec(get(terms[t], "vector", p), child(p, "vector"));
      GenVector term = make_power_net(c, a, grid) * GenVector::constant(grid, v);
      if (acc && acc->dim() != term.dim()) config_error(child(p, "vector"), "term dimension mismatch");
      acc = acc ? *acc + term : term;
    }
    return *acc;
  }
  config_error(ptr, "expected one of constant, samples, terms");
}

json write_vector(const GenVector& u) {
  json samples = json::array();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Eigen::VectorXd v = u.real_sample(i);
    samples.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  }
  return json{{"dim", u.dim()}, {"samples", samples}};
}

BasicOperator read_operator(const json& j, const GridPtr& grid, const std::string& ptr) {
  if (!j.is_object()) config_error(ptr, "expected an object");
  if (j.contains("constant")) return BasicOperator::constant(grid, read_dmat(j["constant"], child(ptr, "constant")));
  if (j.contains("samples")) {
    auto s = per_sample<Eigen::MatrixXd>(j["samples"], grid, child(ptr, "samples"), &read_dmat);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i].rows() != s[0].rows() || s[i].cols() != s[0].cols())
        config_error(child(child(ptr, "samples"), i), "matrix shape differs from first sample");
    return BasicOperator(grid, s);
  }
  if (j.contains("rotation")) {
    const auto p = child(ptr, "rotation");
    const double c = opt_double(j["rotation"], "c", 1.0, p);
    const double a = opt_double(j["rotation"], "a", 1.0, p);
    return BasicOperator::from_function(grid, [&](std::size_t, double eps) {
      const double th = c * std::pow(eps, a);
      Eigen::MatrixXd R(2, 2);
      R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
      return R;
    });
  }
  if (j.contains("terms")) {
    const auto& terms = as_array(j["terms"], child(ptr, "terms"));
    if (terms.empty()) config_error(child(ptr, "terms"), "needs at least one term");
    std::vector<Eigen::MatrixXd> s(grid->size());
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const auto p = child(child(ptr, "terms"), t);
      const double c = finite_double(get(terms[t], "c", p), child(p, "c"));
      const double a = finite_double(get(terms[t], "a", p), child(p, "a"));
      const auto M = read_dmat(get(terms[t], "matrix", p), child(p, "matrix"));
      if (t > 0 && (M.rows() != s[0].rows() || M.cols() != s[0].cols())) config_error(child(p, "matrix"), "term shape mismatch");
      for (std::size_t i = 0; i < s.size(); ++i) {
        const Eigen::MatrixXd add = c * std::pow((*grid)[i], a) * M;
        s[i] = t == 0 ? add : Eigen::MatrixXd(s[i] + add);
      }
    }
    return BasicOperator(grid, s);
  }
  config_error(ptr, "expected one of constant, samples, terms, rotation");
}

json write_operator_header(const BasicOperator& T) {
  return json{{"K", T.size()}, {"d_out", T.rows()}, {"d_in", T.cols()}};
}

std::vector<std::vector<double>> read_obstacle_csv(const std::string& path, std::size_t K, std::size_t n_nodes) {
  std::ifstream in(path);
  if (!in) config_error("", "cannot open obstacle table " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("k,node,psi", 0) != 0) config_error("", path + ": header must be k,node,psi");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> out(K, std::vector<double>(n_nodes, nan));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
      config_error("", path + ":" + std::to_string(lineno) + ": expected three columns");
    try {
      const auto k = std::stoul(a), node = std::stoul(b);
      if (k < 1 || k > K || node >= n_nodes) config_error("", path + ":" + std::to_string(lineno) + ": index out of range");
      out[k - 1][node] = std::stod(c);
    } catch (const std::logic_error&) {
      config_error("", path + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < n_nodes; ++n)
      if (std::isnan(out[k][n]))
        config_error("", path + ": missing value for k=" + std::to_string(k + 1) + " node=" + std::to_string(n));
  return out;
}

ConvexSetNet read_convex_set(const json& j, const GridPtr& grid, const std::string& ptr, const std::string& base_dir) {
  const auto kind = get(j, "kind", ptr);
  if (!kind.is_string()) config_error(child(ptr, "kind"), "expected a string");
  const auto k = kind.get<std::string>();
  try {
    if (k == "box") {
      return ConvexSetNet::box(grid, read_dvec(get(j, "lower", ptr), child(ptr, "lower")),
                               read_dvec(get(j, "upper", ptr), child(ptr, "upper")));
    }
    if (k == "obstacle_lower_bound") {
      if (j.contains("psi_csv")) {
        const auto dim = as_size(get(j, "dim", ptr), child(ptr, "dim"));
        const auto path = (std::filesystem::path(base_dir) / j["psi_csv"].get<std::string>()).string();
        const auto tab = read_obstacle_csv(path, grid->size(), dim);
        std::vector<Eigen::VectorXd> s;
        for (const auto& row : tab) s.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
        return ConvexSetNet::obstacle(GenVector(grid, s));
      }
      return ConvexSetNet::obstacle(read_vector(get(j, "psi", ptr), grid, child(ptr, "psi")));
    }
    if (k == "affine_subspace") {
      const auto offset = read_vector(get(j, "offset", ptr), grid, child(ptr, "offset"));
      const auto cols = read_dmat(get(j, "basis", ptr), child(ptr, "basis"));
      // Basis given as a list of column vectors.
      const Eigen::MatrixXd B = cols.transpose();
      return ConvexSetNet::affine(offset, std::vector<Eigen::MatrixXd>(grid->size(), B));
    }
    if (k == "halfspaces") {
      const auto rows = read_dmat(get(j, "rows", ptr), child(ptr, "rows"));
      const auto rhs = read_dvec(get(j, "rhs", ptr), child(ptr, "rhs"));
      return ConvexSetNet::halfspaces(grid, std::vector<Eigen::MatrixXd>(grid->size(), rows),
                                      std::vector<Eigen::VectorXd>(grid->size(), rhs));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    config_error(ptr, e.what());
  }
  config_error(child(ptr, "kind"), "unknown kind '" + k + "'");
}

json write_convex_set(const ConvexSetNet& C) {
  json j{{"kind", std::string(to_string(C.kind()))}, {"dim", C.dim()}, {"K", C.size()}};
  auto vec = [](const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::isfinite(v(i))) a.push_back(v(i));
      else a.push_back(v(i) > 0 ? "inf" : "-inf");
    }
    return a;
  };
  json slices = json::array();
  for (std::size_t i = 0; i < C.size(); ++i) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, BoxSlice>) {
            slices.push_back({{"lower", vec(s.lower)}, {"upper", vec(s.upper)}});
          } else if constexpr (std::is_same_v<T, AffineSlice>) {
            json cols = json::array();
            for (Eigen::Index c = 0; c < s.basis.cols(); ++c) cols.push_back(vec(s.basis.col(c)));
            slices.push_back({{"offset", vec(s.offset)}, {"basis", cols}});
          } else if constexpr (std::is_same_v<T, HalfspaceSlice>) {
            json rows = json::array();
            for (Eigen::Index r = 0; r < s.rows.rows(); ++r) rows.push_back(vec(s.rows.row(r).transpose()));
            slices.push_back({{"rows", rows}, {"rhs", vec(s.rhs)}});
          } else {
            json boxes = json::array();
            for (const auto& b : s.boxes) boxes.push_back({{"lower", vec(b.lower)}, {"upper", vec(b.upper)}});
            slices.push_back({{"boxes", boxes}});
          }
        },
        C.slice(i));
  }
  j["slices"] = slices;
  return j;
}

fem::CoefficientNet read_coefficient(const json& j, const GridPtr& grid, std::size_t n_nodes, const std::string& ptr,
                                     const std::string& base_dir) {
  using namespace fem;
  if (j.is_number()) return CoefficientNet::constant(j.get<double>());
  const auto kind = get(j, "kind", ptr);
  if (!kind.is_string()) config_error(child(ptr, "kind"), "expected a string");
  const auto k = kind.get<std::string>();
  if (k == "constant") return CoefficientNet::constant(finite_double(get(j, "value", ptr), child(ptr, "value")));
  if (k == "heaviside_nu") {
    HeavisideNuCoeff h;
    h.split = opt_double(j, "split", 0.0, ptr);
    h.p = opt_double(j, "nu_exponent", 1.0, ptr);
    h.coeff = opt_double(j, "nu_coeff", 1.0, ptr);
    return CoefficientNet(h);
  }
  if (k == "mollified_measure") {
    MollifiedMeasureCoeff m;
    if (j.contains("masses")) {
      const auto& a = as_array(j["masses"], child(ptr, "masses"));
      for (std::size_t i = 0; i < a.size(); ++i) {
        const auto p = child(child(ptr, "masses"), i);
        PointMass pm{finite_double(get(a[i], "x", p), child(p, "x")), opt_double(a[i], "weight", 1.0, p)};
        if (pm.weight < 0) config_error(child(p, "weight"), "weights must be nonnegative");
        m.masses.push_back(pm);
      }
    }
    if (j.contains("density")) {
      const auto& a = as_array(j["density"], child(ptr, "density"));
      for (std::size_t i = 0; i < a.size(); ++i) {
        const auto p = child(child(ptr, "density"), i);
        DensityBlock d{finite_double(get(a[i], "c", p), child(p, "c")), finite_double(get(a[i], "a", p), child(p, "a")),
                       finite_double(get(a[i], "b", p), child(p, "b"))};
        if (d.c < 0) config_error(child(p, "c"), "density must be nonnegative");
        if (!(d.b > d.a)) config_error(p, "density block needs b > a");
        m.density.push_back(d);
      }
    }
    return CoefficientNet(m);
  }
  if (k == "tabulated") {
    TabulatedCoeff t;
    if (j.contains("csv")) {
      t.nodal = read_obstacle_csv((std::filesystem::path(base_dir) / j["csv"].get<std::string>()).string(), grid->size(), n_nodes);
    } else if (j.contains("nodal")) {
      const auto& rows = as_array(j["nodal"], child(ptr, "nodal"));
      if (rows.size() == 1) {
        const auto v = read_dvec(rows[0], child(child(ptr, "nodal"), std::size_t{0}));
        t.nodal.assign(grid->size(), std::vector<double>(v.data(), v.data() + v.size()));
      } else {
        if (rows.size() != grid->size()) config_error(child(ptr, "nodal"), "expected 1 or K rows");
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const auto v = read_dvec(rows[i], child(child(ptr, "nodal"), i));
          t.nodal.emplace_back(v.data(), v.data() + v.size());
        }
      }
    } else {
      config_error(ptr, "tabulated coefficient needs nodal or csv");
    }
    for (std::size_t i = 0; i < t.nodal.size(); ++i)
      if (t.nodal[i].size() != n_nodes)
        config_error(child(ptr, "nodal"), "row " + std::to_string(i) + " needs " + std::to_string(n_nodes) + " values");
    return CoefficientNet(t);
  }
  config_error(child(ptr, "kind"), "unknown coefficient kind '" + k + "'");
}

fem::ProblemSpec read_problem(const json& j, const GridPtr& grid, const std::string& ptr, const std::string& base_dir) {
  fem::ProblemSpec s;
  s.grid = grid;
  const auto& mesh = get(j, "mesh", ptr);
  const auto mp = child(ptr, "mesh");
  s.mesh.x_left = opt_double(mesh, "x_left", 0.0, mp);
  s.mesh.x_right = opt_double(mesh, "x_right", 1.0, mp);
  s.mesh.n_elems = as_size(get(mesh, "n_elems", mp), child(mp, "n_elems"));
  try {
    s.mesh.validate();
  } catch (const Error& e) {
    config_error(mp, e.what());
  }
  const std::size_t nn = s.mesh.n_nodes();
  if (j.contains("diffusion")) s.diffusion = read_coefficient(j["diffusion"], grid, nn, child(ptr, "diffusion"), base_dir);
  if (j.contains("potential")) s.potential = read_coefficient(j["potential"], grid, nn, child(ptr, "potential"), base_dir);
  if (j.contains("rhs")) s.rhs = read_coefficient(j["rhs"], grid, nn, child(ptr, "rhs"), base_dir);
  if (j.contains("obstacle")) s.obstacle = read_coefficient(j["obstacle"], grid, nn, child(ptr, "obstacle"), base_dir);
  if (j.contains("point_loads")) {
    const auto& a = as_array(j["point_loads"], child(ptr, "point_loads"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto p = child(child(ptr, "point_loads"), i);
      s.point_loads.push_back({finite_double(get(a[i], "x", p), child(p, "x")), opt_double(a[i], "weight", 1.0, p)});
    }
  }
  if (j.contains("boundary")) {
    const auto& b = j["boundary"];
    const auto bp = child(ptr, "boundary");
    if (b.contains("left")) s.g_left = read_scalar(b["left"], grid, child(bp, "left")).real_samples();
    if (b.contains("right")) s.g_right = read_scalar(b["right"], grid, child(bp, "right")).real_samples();
  }
  try {
    s.validate();
  } catch (const Error& e) {
    config_error(ptr, e.what());
  }
  return s;
}

json write_basis(const OrthoBasis& B) {
  json vecs = json::array(), supports = json::array();
  for (std::size_t j = 0; j < B.size(); ++j) {
    vecs.push_back(write_vector(B.vecs[j]));
    json s = json::array();
    for (auto i : B.supports[j].members()) s.push_back(i + 1);
    supports.push_back(s);
  }
  return json{{"vectors", vecs}, {"supports", supports}, {"slots", B.slots}};
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void CsvWriter::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw Error(ErrorKind::LengthMismatch, "CSV row width differs from header");
  rows_.push_back(std::move(cells));
}

void CsvWriter::write(std::ostream& os) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

void CsvWriter::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigInvalid, "cannot write " + path);
  write(out);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    config_error("", path + ": " + e.what());
  }
}

}  // namespace gennet::io
