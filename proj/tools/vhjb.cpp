// Command-line front end: train, eval, audit, oracle.
#include "vhjb/cli/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Viscosity solutions of HJB equations with PINN value networks"};
  app.require_subcommand(1);

  std::string config;
  auto* train = app.add_subcommand("train", "Train a value network from a JSON run config");
  train->add_option("config", config, "Run config file")->required();

  std::string ckpt, problem;
  vhjb::EvalOptions eval_opts;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a grid and write surface.csv + metrics.json");
  eval->add_option("checkpoint", ckpt, "Checkpoint file")->required();
  eval->add_option("problem", problem, "Builtin id or problem/config/manifest JSON")->required();
  eval->add_option("--grid", eval_opts.grid, "Counts per input, e.g. 51x51");
  eval->add_option("--range", eval_opts.range, "lo:hi per input, comma separated; must lie in the box");
  eval->add_option("--out", eval_opts.out_dir, "Output directory");
  eval->add_option("--seed", eval_opts.seed, "Seed for the convexity audit");

  vhjb::AuditOptions audit_opts;
  auto* audit = app.add_subcommand("audit", "Convexity audit of a checkpoint (leading minors for smooth MLPs)");
  audit->add_option("checkpoint", ckpt, "Checkpoint file")->required();
  audit->add_option("problem", problem, "Builtin id or problem JSON")->required();
  audit->add_option("--pairs", audit_opts.pairs, "Sample pairs (points for smooth MLPs)");
  audit->add_option("--seed", audit_opts.seed, "Audit seed");
  audit->add_option("--min-fraction", audit_opts.min_fraction, "Required passing share for smooth MLPs");
  audit->add_option("--out", audit_opts.out_dir, "Output directory");

  vhjb::OracleOptions oracle_opts;
  double fd_eps = 0.0;
  auto* oracle = app.add_subcommand("oracle", "Residual check of the analytic solution, or a viscous FD solve");
  oracle->add_option("problem", problem, "Builtin id or problem JSON")->required();
  auto* eps_opt = oracle->add_option("--fd-eps", fd_eps, "Viscosity for the finite-difference solve");
  oracle->add_option("--nx", oracle_opts.nx, "FD grid points in x");
  oracle->add_option("--t-start", oracle_opts.t_start, "FD start time");
  oracle->add_option("--out", oracle_opts.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : vhjb::kExitError;
  }

  const vhjb::Streams io{std::cout, std::cerr};
  if (*train) return vhjb::cmd_train(config, io);
  if (*eval) return vhjb::cmd_eval(ckpt, problem, eval_opts, io);
  if (*audit) return vhjb::cmd_audit(ckpt, problem, audit_opts, io);
  if (*eps_opt) oracle_opts.fd_eps = fd_eps;
  return vhjb::cmd_oracle(problem, oracle_opts, io);
}
