#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unistd.h>

#include "gennet/cli.hpp"
#include "gennet/parallel.hpp"

namespace fs = std::filesystem;
using gennet::cli::Options;
using nlohmann::json;

namespace {

const fs::path kConfigs = GENNET_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("gennet_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t line_count(const fs::path& p) {
  std::size_t n = 0;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

struct Result {
  int code;
  std::string out, err;
  json summary;
};

Result run(const std::string& cmd, const fs::path& config, const fs::path& out, std::optional<bool> parallel = {},
           std::optional<std::size_t> K = {}) {
  Options o;
  o.config = config.string();
  o.out = out.string();
  o.parallel = parallel;
  o.grid_K = K;
  std::ostringstream so, se;
  Result r{gennet::cli::run(cmd, o, so, se), so.str(), se.str(), {}};
  if (fs::exists(out / "summary.json")) r.summary = json::parse(slurp(out / "summary.json"));
  return r;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  const auto p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

}  // namespace

TEST_CASE("gennum-check lists the valuations") {
  const auto out = scratch("gennum");
  const auto r = run("gennum-check", kConfigs / "powers.json", out);
  CHECK(r.code == gennet::cli::kOk);
  CHECK(r.summary["valuations"]["eps_2.5"].get<double>() == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(r.summary["valuations"]["one"].get<double>() == doctest::Approx(0.0));
  CHECK(r.summary["valuations"]["eps_-3"].get<double>() == doctest::Approx(-3.0).epsilon(1e-9));
  CHECK(r.summary["command"] == "gennum-check");
  CHECK(r.summary.contains("timings"));
  CHECK(line_count(out / "gennum.csv") == 25);
}

TEST_CASE("vi-solve on the box example") {
  const auto out = scratch("vi");
  const auto r = run("vi-solve", kConfigs / "box2d.json", out);
  CHECK(r.code == gennet::cli::kOk);
  CHECK(r.summary["verdicts"]["certificate_valid"] == true);
  CHECK(r.summary["verdicts"]["vi_inequality"] == true);
  CHECK(r.summary["values"]["contraction_k"].size() == 24);
  CHECK(r.summary["values"]["iterations"].size() == 24);
  CHECK(line_count(out / "vi.csv") == 25);
  CHECK(slurp(out / "vi.csv").rfind("k,eps,alpha,M,rho,k_contraction,iterations,residual,u_1,u_2\n", 0) == 0);

  const auto small = scratch("vi_small");
  CHECK(run("vi-solve", kConfigs / "box2d.json", small, {}, 10).code == 0);
  CHECK(line_count(small / "vi.csv") == 11);
}

TEST_CASE("classify-op, gram-schmidt and the Dirichlet commands") {
  CHECK(run("classify-op", kConfigs / "rotation.json", scratch("rot")).code == 0);
  const auto gs = run("gram-schmidt", kConfigs / "mixed_generators.json", scratch("gs"));
  CHECK(gs.code == 0);
  CHECK(gs.summary["values"]["basis_size"] == 3);

  const auto hd_out = scratch("hd");
  const auto hd = run("solve-dirichlet", kConfigs / "heaviside_delta.json", hd_out);
  CHECK(hd.code == 0);
  CHECK(hd.summary["valuations"]["h1_norm"].get<double>() >= -1.1);
  CHECK_FALSE(hd.summary["verdicts"].contains("classical_consistency"));
  CHECK(line_count(hd_out / "per_eps.csv") == 25);
  CHECK(line_count(hd_out / "solution.csv") == 1 + 24 * 201);

  const auto cosh = run("solve-dirichlet", kConfigs / "dirichlet_cosh.json", scratch("cosh"));
  CHECK(cosh.code == 0);
  CHECK(cosh.summary["verdicts"]["classical_consistency"] == true);
}

TEST_CASE("solve-obstacle reports the free boundary") {
  const auto out = scratch("obstacle");
  const auto r = run("solve-obstacle", kConfigs / "obstacle_psi075.json", out);
  CHECK(r.code == 0);
  const double x1 = std::sqrt(3.0) / 4.0;
  CHECK(std::abs(r.summary["values"]["free_boundary_estimate"]["left"].get<double>() - x1) <= 0.01);
  CHECK(std::abs(r.summary["values"]["free_boundary_estimate"]["right"].get<double>() - (1 - x1)) <= 0.01);
  CHECK(r.summary["verdicts"]["classical_consistency"] == true);
  CHECK(r.summary["verdicts"]["complementarity"] == true);
  CHECK(line_count(out / "per_eps.csv") == 25);
}

TEST_CASE("outputs are deterministic across runs and thread settings") {
  const bool before = gennet::Parallelism::enabled();
  const unsigned threads_before = gennet::Parallelism::threads();
  gennet::Parallelism::set_threads(4);
  for (const auto& [cmd, cfg, files] :
       std::vector<std::tuple<std::string, std::string, std::vector<std::string>>>{
           {"vi-solve", "box2d.json", {"vi.csv"}},
           {"gram-schmidt", "mixed_generators.json", {"gram_schmidt.csv", "gram_schmidt_basis.json"}},
           {"solve-dirichlet", "heaviside_delta.json", {"solution.csv", "per_eps.csv"}}}) {
    const auto a = scratch(cmd + "_a"), b = scratch(cmd + "_b"), c = scratch(cmd + "_c");
    REQUIRE(run(cmd, kConfigs / cfg, a, true).code == 0);
    REQUIRE(run(cmd, kConfigs / cfg, b, true).code == 0);
    REQUIRE(run(cmd, kConfigs / cfg, c, false).code == 0);
    for (const auto& f : files) {
      const auto ref = slurp(a / f);
      CHECK_FALSE(ref.empty());
      CHECK(ref == slurp(b / f));
      CHECK(ref == slurp(c / f));
    }
  }
  gennet::Parallelism::set_enabled(before);
  gennet::Parallelism::set_threads(threads_before);
}

TEST_CASE("config errors name the JSON pointer") {
  const auto dir = scratch("bad");
  auto cfg = json::parse(slurp(kConfigs / "box2d.json"));
  cfg["set"]["kind"] = "sphere";
  const auto r = run("vi-solve", write_config(dir, "bad.json", cfg), dir / "out");
  CHECK(r.code == gennet::cli::kUsage);
  CHECK(r.err.find("ConfigInvalid") != std::string::npos);
  CHECK(r.err.find("/set/kind") != std::string::npos);

  cfg = json::parse(slurp(kConfigs / "box2d.json"));
  cfg["rhs"] = {{"constant", {1, 2, 3}}};
  CHECK(run("vi-solve", write_config(dir, "dim.json", cfg), dir / "out2").code == gennet::cli::kUsage);

  CHECK(run("vi-solve", dir / "missing.json", dir / "out3").code == gennet::cli::kUsage);
  CHECK(run("no-such-command", kConfigs / "box2d.json", dir / "out4").code == gennet::cli::kUsage);
}

TEST_CASE("verdict failures exit with code 2") {
  const auto dir = scratch("fail");
  auto cfg = json::parse(slurp(kConfigs / "rotation.json"));
  cfg["expect"]["self_adjoint"] = true;
  const auto r = run("classify-op", write_config(dir, "rot.json", cfg), dir / "out");
  CHECK(r.code == gennet::cli::kVerdictFailed);
  CHECK(r.summary["verdicts"]["self_adjoint"] == false);

  auto vi = json::parse(slurp(kConfigs / "box2d.json"));
  vi["operator"] = {{"constant", {{1, 0}, {0, -1}}}};
  const auto v = run("vi-solve", write_config(dir, "vi.json", vi), dir / "out_vi");
  CHECK(v.code == gennet::cli::kVerdictFailed);
  CHECK(v.summary["verdicts"]["certificate_valid"] == false);
  CHECK(v.summary["verdicts"]["completed"] == false);
  CHECK(v.summary.contains("error"));
}

TEST_CASE("report merges summaries") {
  const auto dir = scratch("report");
  REQUIRE(run("gennum-check", kConfigs / "powers.json", dir / "ok").code == 0);
  auto cfg = json::parse(slurp(kConfigs / "rotation.json"));
  cfg["expect"]["unitary"] = false;
  REQUIRE(run("classify-op", write_config(dir, "rot.json", cfg), dir / "bad").code == 2);
  std::ofstream(dir / "malformed.json") << R"({"command": "x", "verdicts": {"a": 3}})";

  auto report = [&](std::vector<std::string> paths, const fs::path& out) {
    Options o;
    o.summaries = std::move(paths);
    o.out = out.string();
    std::ostringstream so, se;
    return gennet::cli::run("report", o, so, se);
  };
  const auto ok = (dir / "ok" / "summary.json").string(), bad = (dir / "bad" / "summary.json").string();
  CHECK(report({ok}, dir / "r1") == 0);
  CHECK(fs::exists(dir / "r1" / "report.json"));
  CHECK(json::parse(slurp(dir / "r1" / "report.json"))["all_passed"] == true);
  CHECK(report({ok, bad}, dir / "r2") == 2);
  CHECK(report({}, dir / "r3") == 1);
  CHECK(report({(dir / "malformed.json").string()}, dir / "r4") == 1);
  CHECK(report({(dir / "nope.json").string()}, dir / "r5") == 1);
}

TEST_CASE("argument parsing") {
  const auto out = scratch("argv");
  const std::string cfg = (kConfigs / "powers.json").string(), o = out.string();
  std::vector<std::string> args{"gennet", "gennum-check", "--config", cfg, "--out", o, "--parallel", "off"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  CHECK(gennet::cli::main_entry(static_cast<int>(argv.size()), argv.data()) == 0);
  CHECK(fs::exists(out / "gennum.csv"));

  std::vector<std::string> bad{"gennet", "gennum-check", "--config", cfg, "--parallel", "maybe"};
  std::vector<char*> bargv;
  for (auto& a : bad) bargv.push_back(a.data());
  CHECK(gennet::cli::main_entry(static_cast<int>(bargv.size()), bargv.data()) == 1);

  std::vector<std::string> none{"gennet"};
  std::vector<char*> nargv{none[0].data()};
  CHECK(gennet::cli::main_entry(1, nargv.data()) == 1);
}
