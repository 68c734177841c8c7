#include <doctest.h>

#include "cli.hpp"
#include "radoncurv/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace radoncurv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("radoncurv_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the installed binary; returns its exit status.
int run_binary(const std::string& args) {
  const std::string cmd = std::string(RADONCURV_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_in_process(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "radoncurv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

cli::RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "radoncurv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  auto cfg = cli::parse_args(static_cast<int>(argv.size()), argv.data(), out);
  REQUIRE(cfg.has_value());
  return *cfg;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("flags override the config file") {
  const fs::path dir = scratch("config");
  write_file_atomic(dir / "run.json", R"({"grid-n": 40, "embedding": "circle", "tol": 0.5, "seed": 9})");
  const cli::RunConfig cfg = parse({"verify", "--config", (dir / "run.json").string(), "--tol", "0.25"});
  CHECK(cfg.command == cli::Command::Verify);
  CHECK(cfg.grid_n == 40);
  CHECK(cfg.embedding == "circle");
  CHECK(cfg.tol == 0.25);
  CHECK(cfg.seed == 9);

  write_file_atomic(dir / "bad.json", R"({"grid_size": 40})");
  CHECK_THROWS_AS(parse({"verify", "--config", (dir / "bad.json").string()}), cli::ConfigError);
  write_file_atomic(dir / "broken.json", "{");
  CHECK_THROWS_AS(parse({"verify", "--config", (dir / "broken.json").string()}), cli::ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("per-command defaults and list flags") {
  const cli::RunConfig k = parse({"kernel"});
  CHECK(k.command == cli::Command::Kernel);
  CHECK(k.grid_n == 32);
  CHECK(k.angles == 1);
  const cli::RunConfig v = parse({"verify", "--y", "0.5,-0.25", "--extent", "-3,3"});
  CHECK(v.y == std::vector<double>{0.5, -0.25});
  CHECK(v.extent_lo == -3.0);
  CHECK(v.extent_hi == 3.0);
}

TEST_CASE("invalid settings are configuration errors") {
  CHECK_THROWS_AS(parse({"sinogram", "--angles", "0"}), cli::ConfigError);
  CHECK_THROWS_AS(parse({"verify", "--grid-n", "4"}), cli::ConfigError);
  CHECK_THROWS_AS(parse({"verify", "--embedding", "helix"}), cli::ConfigError);
  CHECK_THROWS_AS(parse({"verify", "--tol", "-1"}), cli::ConfigError);
  CHECK_THROWS_AS(parse({"verify", "--no-such-flag"}), cli::ConfigError);
  CHECK_THROWS_AS(parse({}), cli::ConfigError);
  CHECK(run_in_process({"sinogram", "--angles", "0"}) == 2);
  CHECK(run_in_process({"verify", "--embedding", "line", "--y", "1,2,3"}) == 2);
}

TEST_CASE("sinogram rows follow the gaussian profile") {
  const fs::path dir = scratch("sinogram");
  CHECK(run_in_process({"sinogram", "--angles", "4", "--offsets", "21", "--out-dir", dir.string()}) == 0);
  std::istringstream csv(read_file(dir / "sinogram.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "theta,s,value");
  int rows = 0;
  double worst = 0.0;
  while (std::getline(csv, line)) {
    ++rows;
    double theta = 0, s = 0, v = 0;
    char c1 = 0, c2 = 0;
    std::istringstream(line) >> theta >> c1 >> s >> c2 >> v;
    if (std::fabs(s) > 1.0) continue;
    const double expected = std::sqrt(std::numbers::pi) * std::exp(-s * s);
    worst = std::max(worst, std::fabs(v - expected) / expected);
  }
  CHECK(rows == 84);
  CHECK(worst <= 1e-3);
  const std::string pgm = read_file(dir / "sinogram.pgm");
  CHECK(pgm.rfind("P5\n21 4\n65535\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("zero function sinogram") {
  const fs::path dir = scratch("zero");
  CHECK(run_in_process({"sinogram", "--f", "zero", "--grid-n", "48", "--extent", "-3,3", "--angles", "3",
                        "--offsets", "5", "--t-samples", "64", "--out-dir", dir.string()}) == 0);
  std::istringstream csv(read_file(dir / "sinogram.csv"));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) CHECK(line.substr(line.rfind(',') + 1) == "0");
  const std::string pgm = read_file(dir / "sinogram.pgm");
  const std::string header = "P5\n5 3\n65535\n";
  for (std::size_t i = header.size(); i < pgm.size(); ++i) CHECK(pgm[i] == 0);
  fs::remove_all(dir);
}

TEST_CASE("kernel command reports rank and kernel dimension") {
  const fs::path dir = scratch("kernel");
  CHECK(run_in_process({"kernel", "--basis-csv", "--out-dir", dir.string()}) == 0);
  const auto j = nlohmann::json::parse(read_file(dir / "kernel.json"));
  CHECK(j["kernel_dim"].get<int>() > 0);
  CHECK(j["rank"].get<int>() <= std::min(j["rows"].get<int>(), j["interior_size"].get<int>()));
  CHECK(j["max_residual"].get<double>() <= 1e-8);
  CHECK(fs::exists(dir / "kernel_basis.csv"));

  CHECK(run_in_process({"kernel", "--embedding", "dirac", "--out-dir", dir.string()}) == 0);
  const auto d = nlohmann::json::parse(read_file(dir / "kernel.json"));
  CHECK(d["kernel_dim"].get<int>() == 0);

  CHECK(run_in_process({"kernel", "--grid-n", "128", "--angles", "64", "--offsets", "64"}) == 2);
  fs::remove_all(dir);
}

TEST_CASE("dirac demo") {
  const fs::path dir = scratch("dirac");
  std::string text;
  CHECK(run_in_process({"dirac-demo", "--out-dir", dir.string()}, &text) == 0);
  const auto j = nlohmann::json::parse(read_file(dir / "dirac_demo.json"));
  CHECK(j["max_abs_error"].get<double>() <= 1e-12);
  CHECK(j["pass"].get<bool>());
  fs::remove_all(dir);
}

TEST_CASE("binary exit codes") {
  const fs::path dir = scratch("exit");
  const std::string out = " --out-dir " + dir.string();
  CHECK(run_binary("verify --embedding dirac" + out) == 0);
  CHECK(run_binary("verify --embedding line" + out) == 0);
  CHECK(run_binary("verify --embedding line --tol 1e-15" + out) == 1);
  CHECK(run_binary("sinogram --angles 0" + out) == 2);
  CHECK(run_binary("verify --grid-n 4" + out) == 2);
  CHECK(run_binary("--help") == 0);
  fs::remove_all(dir);
}

TEST_CASE("verify reports are byte identical across runs") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const char* emb : {"dirac", "line", "circle"}) {
    CHECK(run_binary(std::string("verify --embedding ") + emb + " --seed 5 --out-dir " + a.string()) == 0);
    CHECK(run_binary(std::string("verify --embedding ") + emb + " --seed 5 --out-dir " + b.string()) == 0);
    CHECK(read_file(a / "report.json") == read_file(b / "report.json"));
  }
  CHECK(run_binary("sinogram --angles 4 --offsets 9 --out-dir " + a.string()) == 0);
  CHECK(run_binary("sinogram --angles 4 --offsets 9 --out-dir " + b.string()) == 0);
  CHECK(read_file(a / "sinogram.csv") == read_file(b / "sinogram.csv"));
  CHECK(read_file(a / "sinogram.pgm") == read_file(b / "sinogram.pgm"));
  fs::remove_all(a);
  fs::remove_all(b);
}

}  // TEST_SUITE
