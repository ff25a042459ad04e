#include "almsics/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "almsics/oracle.hpp"

#ifndef ALMSICS_VERSION
#define ALMSICS_VERSION "unknown"
#endif

namespace almsics::cli {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string digits17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string describe(const fs::path& path) { return "'" + path.string() + "'"; }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + describe(path.parent_path()) + ": " + ec.message());
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + describe(path) + " for writing");
  f << text;
  f.close();
  if (!f) throw IoError("write to " + describe(path) + " failed");
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + describe(path) + " for reading");
  return f;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  if (s.empty()) throw IoError(where + ": empty field");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw IoError(where + ": cannot parse '" + s + "' as a number");
  return v;
}

long long parse_integer(const std::string& s, const std::string& where) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw IoError(where + ": cannot parse '" + s + "' as an integer");
  }
  return v;
}

json manifest_base(const std::string& command, const std::string& started) {
  return json{{"command", command}, {"version", ALMSICS_VERSION}, {"started_at", started}};
}

void write_manifest(const fs::path& prefix, json manifest) {
  manifest["finished_at"] = utc_timestamp();
  write_text(with_suffix(prefix, ".manifest.json"), manifest.dump(2) + "\n");
}

}  // namespace

// ---------------------------------------------------------------------------

std::string format_matrix(const Eigen::MatrixXd& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += digits17(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd parse_matrix(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    std::vector<double> row;
    for (const auto& field : split(line, ',')) row.push_back(parse_double(field, where));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(where + ": expected " + std::to_string(rows.front().size()) + " columns, found " +
                    std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(source + ": no matrix rows");
  if (rows.size() != rows.front().size()) {
    throw IoError(source + ": matrix is " + std::to_string(rows.size()) + " x " +
                  std::to_string(rows.front().size()) + ", expected square");
  }
  const Index n = static_cast<Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void write_matrix(const fs::path& path, const Eigen::MatrixXd& m) { write_text(path, format_matrix(m)); }

Eigen::MatrixXd read_matrix(const fs::path& path) {
  auto f = open_input(path);
  return parse_matrix(f, path.string());
}

SymMatrixd read_sym_matrix(const fs::path& path) {
  const Eigen::MatrixXd m = read_matrix(path);
  if (!m.allFinite()) throw IoError(describe(path) + ": matrix has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw IoError(describe(path) + ": matrix is not symmetric");
  }
  return SymMatrixd(m);
}

std::string format_pattern(const metrics::SparsityPattern& p) {
  std::string out;
  for (const auto& [i, j] : p.entries()) out += std::to_string(i) + "," + std::to_string(j) + "\n";
  return out;
}

void write_pattern(const fs::path& path, const metrics::SparsityPattern& p) {
  write_text(path, format_pattern(p));
}

metrics::SparsityPattern read_pattern(const fs::path& path, Index n) {
  auto f = open_input(path);
  std::vector<metrics::SparsityPattern::Entry> entries;
  std::string line;
  long line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw IoError(where + ": expected 'i,j'");
    entries.emplace_back(parse_integer(fields[0], where), parse_integer(fields[1], where));
  }
  try {
    return metrics::SparsityPattern(n, std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw IoError(describe(path) + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

json config_to_json(const sics::SicsConfig& c) {
  json j;
  j["eps_gap"] = c.eps_gap;
  j["eps_rel"] = c.eps_rel;
  j["n_gap"] = c.n_gap;
  j["n_mu"] = c.n_mu;
  j["eta_mu"] = c.eta_mu;
  j["mu_bar"] = c.mu_bar ? json(*c.mu_bar) : json("auto");
  j["mu0"] = c.mu0 ? json(*c.mu0) : json("auto");
  j["max_iter"] = c.max_iter;
  j["fixed_mu_mode"] = c.fixed_mu_mode;
  j["init"] = c.init == sics::InitialPoint::identity ? "identity" : "diagonal";
  return j;
}

sics::SicsConfig config_from_json(const json& j, sics::SicsConfig c) {
  if (!j.is_object()) throw UsageError("config: expected a JSON object");
  auto number = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw UsageError("config: '" + key + "' must be a number");
    return v.get<double>();
  };
  auto integer = [](const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw UsageError("config: '" + key + "' must be an integer");
    return v.get<long>();
  };
  auto optional_number = [&](const json& v, const std::string& key) -> std::optional<double> {
    if (v.is_null() || (v.is_string() && v.get<std::string>() == "auto")) return std::nullopt;
    return number(v, key);
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "eps_gap") c.eps_gap = number(v, key);
    else if (key == "eps_rel") c.eps_rel = number(v, key);
    else if (key == "n_gap") c.n_gap = integer(v, key);
    else if (key == "n_mu") c.n_mu = integer(v, key);
    else if (key == "eta_mu") c.eta_mu = number(v, key);
    else if (key == "mu_bar") c.mu_bar = optional_number(v, key);
    else if (key == "mu0") c.mu0 = optional_number(v, key);
    else if (key == "max_iter") c.max_iter = integer(v, key);
    else if (key == "fixed_mu_mode") {
      if (!v.is_boolean()) throw UsageError("config: 'fixed_mu_mode' must be true or false");
      c.fixed_mu_mode = v.get<bool>();
    } else if (key == "init") {
      const std::string s = v.is_string() ? v.get<std::string>() : "";
      if (s == "diagonal") c.init = sics::InitialPoint::diagonal;
      else if (s == "identity") c.init = sics::InitialPoint::identity;
      else throw UsageError("config: 'init' must be \"diagonal\" or \"identity\"");
    } else {
      throw UsageError("config: unknown key '" + key + "'");
    }
  }
  return c;
}

sics::SicsConfig load_config(const fs::path& path) {
  auto f = open_input(path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw IoError(describe(path) + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------

fs::path resolve_prefix(const std::optional<std::string>& prefix, const std::string& default_name) {
  fs::path p = prefix && !prefix->empty() ? fs::path(*prefix) : fs::path(default_name);
  const char* dir = std::getenv(kOutDirEnv);
  if (p.is_relative() && dir && *dir) p = fs::path(dir) / p;
  return p;
}

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) {
  return fs::path(prefix.string() + suffix);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_trace(const std::vector<sics::IterationRecord>& trace) {
  std::string out = std::string(kTraceHeader) + "\n";
  for (const auto& r : trace) {
    out += std::to_string(r.k) + "," + shortest(r.mu) + "," + shortest(r.F) + ",";
    out += (r.dgap ? shortest(*r.dgap) : "") + "," + (r.rel_gap ? shortest(*r.rel_gap) : "") + ",";
    out += shortest(r.frel) + "," + shortest(r.xrel) + "," + shortest(r.yrel) + ",";
    out += std::string(r.skipped ? "1" : "0") + "," + shortest(r.seconds) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_gen(const GenOptions& o, std::ostream& log) {
  const std::string started = utc_timestamp();
  const datagen::SyntheticInstance inst =
      datagen::gen_instance(o.n, o.density, o.seed, o.structure, o.min_eig_ratio);
  const fs::path prefix = resolve_prefix(o.out, "instance_n" + std::to_string(o.n) + "_s" + std::to_string(o.seed));
  const fs::path sigma = with_suffix(prefix, ".sigma.csv");
  const fs::path truth = with_suffix(prefix, ".truth.pat");
  write_matrix(sigma, inst.sigma_hat.matrix());
  write_pattern(truth, inst.ground_truth);

  json m = manifest_base("gen", started);
  m["parameters"] = {{"n", inst.n},
                     {"p", inst.p},
                     {"density", inst.density},
                     {"min_eig_ratio", inst.min_eig_ratio},
                     {"structure", datagen::to_string(inst.structure)}};
  m["seeds"] = {{"seed", inst.seed},
                {"u_seed", datagen::derive_seed(inst.seed, 0)},
                {"sample_seed", datagen::derive_seed(inst.seed, 1)}};
  m["instance"] = {{"repair_shift", inst.repair_shift},
                   {"ground_truth_nnz", inst.ground_truth.nnz()},
                   {"ground_truth_density",
                    static_cast<double>(inst.ground_truth.nnz()) / static_cast<double>(inst.n * inst.n)}};
  m["outputs"] = {{"sigma", sigma.string()}, {"truth", truth.string()}};
  write_manifest(prefix, m);
  log << "wrote " << sigma.string() << " and " << truth.string() << " (ground truth "
      << inst.ground_truth.nnz() << " nonzeros)\n";
  return kOk;
}

int cmd_solve(const SolveOptions& o, std::ostream& log) {
  const std::string started = utc_timestamp();
  const SymMatrixd sigma = read_sym_matrix(o.sigma_path);
  sics::SicsConfig config = o.config_path ? load_config(*o.config_path) : sics::SicsConfig{};
  config = config_from_json(o.overrides, config);
  sics::validate(config);
  const sics::SicsProblem problem(sigma, o.rho, o.allow_zero_rho);

  // the snapshot records the mu values actually used
  const sics::MuSchedule schedule(config, o.rho);
  sics::SicsConfig effective = config;
  effective.mu0 = schedule.mu0();
  effective.mu_bar = schedule.mu_bar();

  sics::SolveResult r;
  try {
    r = sics::solve(problem, config);
  } catch (const DivergenceError& e) {
    log << "solve: diverged at iteration " << e.iteration() << " (mu = " << e.mu() << "): " << e.what() << "\n";
    return kSolverFailure;
  } catch (const Error& e) {
    log << "solve: " << e.what() << "\n";
    return kSolverFailure;
  }

  const fs::path prefix = resolve_prefix(o.out, fs::path(o.sigma_path).stem().stem().string() + ".rho" + shortest(o.rho));
  const fs::path xp = with_suffix(prefix, ".X.csv");
  const fs::path yp = with_suffix(prefix, ".Y.csv");
  const fs::path tp = with_suffix(prefix, ".trace.csv");
  write_matrix(xp, r.X.matrix());
  write_matrix(yp, r.Y.matrix());
  write_text(tp, format_trace(r.trace));

  json m = manifest_base("solve", started);
  m["config"] = config_to_json(effective);
  m["rho"] = o.rho;
  m["allow_zero_rho"] = o.allow_zero_rho;
  m["seeds"] = json::object();
  m["inputs"] = {{"sigma", o.sigma_path}, {"config", o.config_path ? json(*o.config_path) : json(nullptr)}};
  m["outputs"] = {{"X", xp.string()}, {"Y", yp.string()}, {"trace", tp.string()}};
  json res = {{"termination", sics::to_string(r.termination)},
              {"iterations", r.iterations},
              {"unskipped", r.unskipped},
              {"alpha", r.alpha.alpha},
              {"nnz_Y", metrics::pattern_from_primal(r.Y).nnz()}};
  if (r.final_gap) {
    res["dgap"] = r.final_gap->dgap;
    res["rel_gap"] = r.final_gap->rel_gap;
    res["pobj"] = r.final_gap->pobj;
    res["dobj"] = r.final_gap->dobj;
    res["dual_feasible"] = r.final_gap->dual_feasible;
  }
  m["result"] = res;
  write_manifest(prefix, m);

  log << sics::to_string(r.termination) << " after " << r.iterations << " iterations";
  if (r.final_gap) log << ", Dgap " << r.final_gap->dgap << ", Rel.gap " << r.final_gap->rel_gap;
  log << "\n";
  return kOk;
}

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& log) {
  const SymMatrixd sigma = read_sym_matrix(o.sigma_path);
  if (sigma.size() > oracle::kMaxDimension) {
    throw UsageError("verify: n = " + std::to_string(sigma.size()) + " exceeds the oracle limit of " +
                     std::to_string(oracle::kMaxDimension));
  }
  const sics::SicsProblem problem(sigma, o.rho);
  oracle::AgreementReport rep;
  try {
    rep = oracle::agree(problem, o.gap_tol);
  } catch (const Error& e) {
    log << "verify: " << e.what() << "\n";
    return kSolverFailure;
  }

  int code = kOk;
  std::string verdict = "agree";
  if (!rep.oracle_certified) {
    code = kUncertified;
    verdict = "oracle uncertified";
  } else if (!rep.alm_certified) {
    code = kSolverFailure;
    verdict = "alm uncertified";
  } else if (!(o.tol > 0) || rep.rel_objective_diff > o.tol) {
    // tol <= 0 never passes
    code = kVerifyFailure;
    verdict = "disagree";
  }

  const json report = {{"sigma", o.sigma_path},
                       {"rho", o.rho},
                       {"tol", o.tol},
                       {"gap_tol", o.gap_tol},
                       {"F_alm", rep.F_alm},
                       {"F_oracle", rep.F_oracle},
                       {"rel_objective_diff", rep.rel_objective_diff},
                       {"alm_gap", rep.alm_gap},
                       {"oracle_gap", rep.oracle_gap},
                       {"alm_certified", rep.alm_certified},
                       {"oracle_certified", rep.oracle_certified},
                       {"alm_iterations", rep.alm_iterations},
                       {"oracle_iterations", rep.oracle_iterations},
                       {"pattern", {{"alm_not_oracle", rep.pattern.a_not_b},
                                    {"oracle_not_alm", rep.pattern.b_not_a},
                                    {"both", rep.pattern.both}}},
                       {"verdict", verdict}};
  const std::string text = report.dump(2) + "\n";
  out << text;
  if (o.out) write_text(resolve_prefix(o.out, "verify.json"), text);
  return code;
}

std::vector<BenchRow> parse_bench_spec(std::istream& in, const std::string& source) {
  std::vector<BenchRow> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (rows.empty() && line[0] == 'n') continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto f = split(line, ',');
    if (f.size() != 3) throw IoError(where + ": expected 'n,rho,seed'");
    const long long n = parse_integer(f[0], where);
    const long long seed = parse_integer(f[2], where);
    if (n < 2 || seed < 0) throw IoError(where + ": need n >= 2 and seed >= 0");
    rows.push_back({static_cast<Index>(n), parse_double(f[1], where), static_cast<std::uint64_t>(seed)});
  }
  return rows;
}

namespace {

std::string bench_row(const BenchRow& row, const BenchOptions& o, const sics::SicsConfig& config) {
  std::string prefix = std::to_string(row.n) + "," + shortest(row.rho) + "," + std::to_string(row.seed) + ",";
  try {
    const auto inst = datagen::gen_instance(row.n, o.density, row.seed, datagen::UStructure::full, o.min_eig_ratio);
    const sics::SicsProblem problem(inst.sigma_hat, row.rho);
    const auto start = std::chrono::steady_clock::now();
    const auto r = sics::solve(problem, config);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto found = metrics::pattern_from_primal(r.Y);
    const auto stats = metrics::recovery_stats(found, inst.ground_truth);
    std::string s = prefix + std::to_string(r.iterations) + ",";
    s += (r.final_gap ? shortest(r.final_gap->dgap) : "") + "," + (r.final_gap ? shortest(r.final_gap->rel_gap) : "");
    s += "," + shortest(seconds) + "," + std::to_string(found.nnz()) + ",";
    s += std::to_string(stats.true_pos) + "," + std::to_string(stats.false_pos) + "," +
         std::to_string(stats.false_neg) + "," + sics::to_string(r.termination);
    return s;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    return prefix + ",,,,,,,,error: " + msg;
  }
}

}  // namespace

int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& log) {
  auto f = open_input(o.spec_path);
  const std::vector<BenchRow> rows = parse_bench_spec(f, o.spec_path);
  const sics::SicsConfig config = o.config_path ? load_config(*o.config_path) : sics::SicsConfig{};
  sics::validate(config);

  std::vector<std::string> lines(rows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) lines[i] = bench_row(rows[i], o, config);
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(o.jobs, static_cast<unsigned>(std::max<std::size_t>(rows.size(), 1))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string text = std::string(kBenchHeader) + "\n";
  for (const auto& l : lines) text += l + "\n";
  if (o.out) {
    const fs::path path = resolve_prefix(o.out, "bench.csv");
    write_text(path, text);
    log << "wrote " << rows.size() << " rows to " << path.string() << "\n";
  } else {
    out << text;
  }
  return kOk;
}

}  // namespace almsics::cli
