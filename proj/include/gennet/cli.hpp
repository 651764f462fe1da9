#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gennet::cli {

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::size_t> grid_K;
  std::uint64_t seed = 0;
  std::optional<bool> parallel;
  /// Inputs of the report command.
  std::vector<std::string> summaries;
};

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kVerdictFailed = 2;

/// Runs one command; diagnostics go to err, tables to out.
int run(const std::string& command, const Options& options, std::ostream& out, std::ostream& err);

/// Argument parsing front end used by the gennet executable.
int main_entry(int argc, char** argv);

}  // namespace gennet::cli
