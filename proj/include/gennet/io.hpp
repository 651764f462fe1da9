#pragma once

// JSON and CSV encodings of grids, policies, nets, convex sets and problem
// specifications. Readers report failures as ConfigInvalid with the JSON
// pointer of the offending value.

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "gennet/convex_projection.hpp"
#include "gennet/fem.hpp"
#include "gennet/submodules.hpp"

namespace gennet::io {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& pointer, const std::string& message);

GridPtr read_grid(const json& j, const std::string& ptr = "/grid");
json write_grid(const EpsGrid& grid);
NumericPolicy read_policy(const json& j, const std::string& ptr = "/policy");
json write_policy(const NumericPolicy& policy);

/// Number, {"constant": x}, {"terms": [{"c", "a"}]} or {"samples": [...]}.
GenScalar read_scalar(const json& j, const GridPtr& grid, const std::string& ptr);
/// {"dim", "samples"}, {"constant": [...]} or {"terms": [{"c", "a", "vector"}]}.
GenVector read_vector(const json& j, const GridPtr& grid, const std::string& ptr);
json write_vector(const GenVector& u);
/// {"constant": rows}, {"samples": [...]}, {"terms": [{"c", "a", "matrix"}]}
/// or {"rotation": {"c", "a"}} for the plane rotation by θ_k = c·ε_k^a.
BasicOperator read_operator(const json& j, const GridPtr& grid, const std::string& ptr);
json write_operator_header(const BasicOperator& T);

/// Kind-discriminated set description. base_dir resolves "psi_csv" paths.
ConvexSetNet read_convex_set(const json& j, const GridPtr& grid, const std::string& ptr, const std::string& base_dir = ".");
json write_convex_set(const ConvexSetNet& C);

/// Obstacle table with header k,node,psi (k 1-based, node 0-based).
std::vector<std::vector<double>> read_obstacle_csv(const std::string& path, std::size_t K, std::size_t n_nodes);

fem::CoefficientNet read_coefficient(const json& j, const GridPtr& grid, std::size_t n_nodes, const std::string& ptr,
                                     const std::string& base_dir = ".");
fem::ProblemSpec read_problem(const json& j, const GridPtr& grid, const std::string& ptr, const std::string& base_dir = ".");

json write_basis(const OrthoBasis& B);

/// Shortest round-trip decimal form; "inf", "-inf", "nan" for non-finite.
std::string format_double(double x);

/// Table with mandatory header; rows are written in insertion order.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> cells);
  std::size_t rows() const noexcept { return rows_.size(); }
  void write(std::ostream& os) const;
  void write_file(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

json read_json_file(const std::string& path);

}  // namespace gennet::io
