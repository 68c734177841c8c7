#ifndef RADONCURV_TOOLS_CLI_HPP
#define RADONCURV_TOOLS_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace radoncurv::cli {

enum class Command { Sinogram, Verify, Kernel, DiracDemo };

/// Anything wrong with the arguments or the config file. Maps to exit 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Command command = Command::Verify;

  int dim = 2;
  int grid_n = 128;
  double extent_lo = -5.5;
  double extent_hi = 5.5;
  int margin = 4;

  std::string embedding = "line";
  double radius = 1.5;
  int t_samples = 256;
  std::optional<double> s_max;
  int kernel_order = 3;

  int angles = 64;
  int offsets = 65;
  std::string f = "gaussian";
  double width = 0.0;  // <= 0 picks the built-in default

  std::vector<double> y;  // empty: drawn from the seed
  int directions = 10;
  int pool_size = 12;
  double tol = 1e-4;
  std::uint64_t seed = 1;
  std::string route = "fd";

  bool basis_csv = false;
  std::filesystem::path out_dir = ".";
};

/// Parses argv (argv[0] is the program name). Per-command defaults are
/// applied first, then the --config file, then explicit flags. Throws
/// ConfigError. Returns nullopt when only help was requested.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

/// Range checks shared by every command. Throws ConfigError.
void validate(const RunConfig& config);

/// Exit codes: 0 success, 1 verification failed, 2 configuration error.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with the exit-code contract applied to exceptions.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace radoncurv::cli

#endif  // RADONCURV_TOOLS_CLI_HPP
