// almsics: generate synthetic instances, solve, verify against the reference
// solver, and run benchmark tables.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "almsics/cli.hpp"

namespace cli = almsics::cli;

int main(int argc, char** argv) {
  CLI::App app{"Sparse inverse covariance selection by alternating linearization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ALMSICS_VERSION);

  cli::GenOptions gen;
  std::string structure = "full";
  std::string gen_out;
  auto* g = app.add_subcommand("gen", "generate a synthetic instance");
  g->add_option("-n,--n", gen.n, "dimension")->required()->check(CLI::Range(2, 1 << 20));
  g->add_option("--density", gen.density, "nonzero probability of each entry of U")->capture_default_str();
  g->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
  g->add_option("--min-eig-ratio", gen.min_eig_ratio, "conditioning floor of the true precision")
      ->capture_default_str();
  g->add_option("--structure", structure, "U layout")->check(CLI::IsMember({"full", "unit_upper"}))->capture_default_str();
  g->add_option("-o,--out", gen_out, "output prefix");

  cli::SolveOptions solve;
  std::string solve_config, solve_out, init;
  double eps_gap = 0, eps_rel = 0, eta_mu = 0, mu_bar = 0, mu0 = 0;
  long n_gap = 0, n_mu = 0, max_iter = 0;
  bool fixed_mu = false;
  auto* s = app.add_subcommand("solve", "solve one instance");
  s->add_option("sigma", solve.sigma_path, "sample covariance CSV")->required();
  s->add_option("--rho", solve.rho, "l1 weight")->required();
  s->add_flag("--allow-zero-rho", solve.allow_zero_rho, "accept rho = 0");
  s->add_option("-c,--config", solve_config, "JSON config");
  s->add_option("-o,--out", solve_out, "output prefix");
  auto* o_eps_gap = s->add_option("--eps-gap", eps_gap);
  auto* o_eps_rel = s->add_option("--eps-rel", eps_rel);
  auto* o_n_gap = s->add_option("--n-gap", n_gap);
  auto* o_n_mu = s->add_option("--n-mu", n_mu);
  auto* o_eta = s->add_option("--eta-mu", eta_mu);
  auto* o_mu_bar = s->add_option("--mu-bar", mu_bar);
  auto* o_mu0 = s->add_option("--mu0", mu0);
  auto* o_max_iter = s->add_option("--max-iter", max_iter);
  auto* o_fixed = s->add_flag("--fixed-mu", fixed_mu, "hold mu at mu0");
  auto* o_init = s->add_option("--init", init)->check(CLI::IsMember({"diagonal", "identity"}));

  cli::VerifyOptions verify;
  std::string verify_out;
  auto* v = app.add_subcommand("verify", "compare against the reference solver (n <= 200)");
  v->add_option("sigma", verify.sigma_path, "sample covariance CSV")->required();
  v->add_option("--rho", verify.rho, "l1 weight")->required();
  v->add_option("--tol", verify.tol, "allowed relative objective difference; 0 always fails")->capture_default_str();
  v->add_option("--gap-tol", verify.gap_tol, "duality gap both solvers must reach")->capture_default_str();
  v->add_option("-o,--out", verify_out, "also write the report here");

  cli::BenchOptions bench;
  std::string bench_out, bench_config;
  auto* b = app.add_subcommand("bench", "solve every (n, rho, seed) line of a spec file");
  b->add_option("spec", bench.spec_path, "lines of n,rho,seed")->required();
  b->add_option("-o,--out", bench_out, "CSV output (stdout if omitted)");
  b->add_option("-j,--jobs", bench.jobs, "parallel solves")->capture_default_str();
  b->add_option("--density", bench.density)->capture_default_str();
  b->add_option("--min-eig-ratio", bench.min_eig_ratio)->capture_default_str();
  b->add_option("-c,--config", bench_config, "JSON config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }

  auto opt = [](const std::string& v) { return v.empty() ? std::nullopt : std::optional<std::string>(v); };

  try {
    if (*g) {
      gen.structure = structure == "unit_upper" ? almsics::datagen::UStructure::unit_upper
                                                : almsics::datagen::UStructure::full;
      gen.out = opt(gen_out);
      return cli::cmd_gen(gen, std::cerr);
    }
    if (*s) {
      solve.config_path = opt(solve_config);
      solve.out = opt(solve_out);
      auto& j = solve.overrides;
      if (*o_eps_gap) j["eps_gap"] = eps_gap;
      if (*o_eps_rel) j["eps_rel"] = eps_rel;
      if (*o_n_gap) j["n_gap"] = n_gap;
      if (*o_n_mu) j["n_mu"] = n_mu;
      if (*o_eta) j["eta_mu"] = eta_mu;
      if (*o_mu_bar) j["mu_bar"] = mu_bar;
      if (*o_mu0) j["mu0"] = mu0;
      if (*o_max_iter) j["max_iter"] = max_iter;
      if (*o_fixed) j["fixed_mu_mode"] = fixed_mu;
      if (*o_init) j["init"] = init;
      return cli::cmd_solve(solve, std::cerr);
    }
    if (*v) {
      verify.out = opt(verify_out);
      return cli::cmd_verify(verify, std::cout, std::cerr);
    }
    bench.out = opt(bench_out);
    bench.config_path = opt(bench_config);
    return cli::cmd_bench(bench, std::cout, std::cerr);
  } catch (const almsics::DivergenceError& e) {
    std::cerr << "error: " << e.what() << " (iteration " << e.iteration() << ")\n";
    return cli::kSolverFailure;
  } catch (const cli::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const cli::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kSolverFailure;
  }
}
