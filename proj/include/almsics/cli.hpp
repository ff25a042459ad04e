#pragma once

// File formats and the four commands behind tools/almsics.
//
//   <prefix>.sigma.csv     n rows of n values, %.17g, comma separated
//   <prefix>.truth.pat     "i,j" per line, zero-based, sorted
//   <prefix>.X.csv / .Y.csv
//   <prefix>.trace.csv     iter,mu,F,Dgap,Rel.gap,Frel,Xrel,Yrel,skipped,seconds
//   <prefix>.manifest.json

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "almsics/datagen.hpp"
#include "almsics/metrics.hpp"
#include "almsics/sics_solver.hpp"

namespace almsics::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kUsage = 1, kSolverFailure = 2, kVerifyFailure = 3, kUncertified = 4 };

// Name of the environment variable holding the default output directory.
inline constexpr const char* kOutDirEnv = "ALMSICS_OUT_DIR";

/// Bad input or arguments; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read, written or parsed. The message names the path
/// (and line, for parse errors).
class IoError : public Error {
 public:
  using Error::Error;
};

// --- matrices and patterns ------------------------------------------------

std::string format_matrix(const Eigen::MatrixXd& m);
Eigen::MatrixXd parse_matrix(std::istream& in, const std::string& source);

void write_matrix(const fs::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const fs::path& path);
SymMatrixd read_sym_matrix(const fs::path& path);

std::string format_pattern(const metrics::SparsityPattern& p);
void write_pattern(const fs::path& path, const metrics::SparsityPattern& p);
metrics::SparsityPattern read_pattern(const fs::path& path, Index n);

// --- config ---------------------------------------------------------------

/// Every SicsConfig field; mu0 and mu_bar are "auto" when unset.
json config_to_json(const sics::SicsConfig& c);

/// Applies the keys present in `j` on top of `base`. Unknown keys and
/// ill-typed values throw UsageError.
sics::SicsConfig config_from_json(const json& j, sics::SicsConfig base = {});

sics::SicsConfig load_config(const fs::path& path);

// --- output locations -----------------------------------------------------

/// An explicit relative prefix lands under $ALMSICS_OUT_DIR when that is set;
/// without a prefix the default name is used in the same place.
fs::path resolve_prefix(const std::optional<std::string>& prefix, const std::string& default_name);

fs::path with_suffix(const fs::path& prefix, const std::string& suffix);

std::string utc_timestamp();

// --- commands -------------------------------------------------------------

struct GenOptions {
  Index n = 0;
  double density = datagen::kDefaultDensity;
  std::uint64_t seed = 1;
  double min_eig_ratio = datagen::kDefaultMinEigRatio;
  datagen::UStructure structure = datagen::UStructure::full;
  std::optional<std::string> out;
};

struct SolveOptions {
  std::string sigma_path;
  double rho = 0;
  bool allow_zero_rho = false;
  std::optional<std::string> config_path;
  json overrides = json::object();  // applied after the config file
  std::optional<std::string> out;
};

struct VerifyOptions {
  std::string sigma_path;
  double rho = 0;
  double tol = 1e-4;      // allowed relative objective difference; <= 0 always fails
  double gap_tol = 1e-6;  // duality gap both solvers must certify
  std::optional<std::string> out;
};

struct BenchOptions {
  std::string spec_path;
  std::optional<std::string> out;  // CSV path; stdout when empty
  unsigned jobs = 1;
  double density = datagen::kDefaultDensity;
  double min_eig_ratio = datagen::kDefaultMinEigRatio;
  std::optional<std::string> config_path;
};

struct BenchRow {
  Index n = 0;
  double rho = 0;
  std::uint64_t seed = 0;
};

/// Lines "n,rho,seed"; blank lines and '#' comments skipped, an optional
/// header line starting with "n" is ignored.
std::vector<BenchRow> parse_bench_spec(std::istream& in, const std::string& source);

int cmd_gen(const GenOptions& o, std::ostream& log);
int cmd_solve(const SolveOptions& o, std::ostream& log);
int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& log);
int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& log);

inline constexpr const char* kTraceHeader = "iter,mu,F,Dgap,Rel.gap,Frel,Xrel,Yrel,skipped,seconds";
inline constexpr const char* kBenchHeader =
    "n,rho,seed,iter,Dgap,Rel.gap,seconds,nnzY,true_pos,false_pos,false_neg,status";

std::string format_trace(const std::vector<sics::IterationRecord>& trace);

}  // namespace almsics::cli
