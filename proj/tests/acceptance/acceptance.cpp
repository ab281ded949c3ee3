// End-to-end acceptance run: prints one PASS/FAIL line per criterion and exits
// nonzero when a gating criterion fails. Usage: acceptance [work_dir]
#include "vhjb/cli/commands.hpp"
#include "vhjb/hjb/builtin.hpp"
#include "vhjb/networks/checkpoint.hpp"
#include "vhjb/networks/convexity.hpp"
#include "vhjb/oracle/analytic.hpp"
#include "vhjb/oracle/residual_check.hpp"
#include "vhjb/oracle/viscosity_fd.hpp"
#include "vhjb/training/losses.hpp"
#include "vhjb/training/minors.hpp"
#include "vhjb/training/trainer.hpp"

#include "../support/test_util.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

using namespace vhjb;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool gating = true;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Quiet streams for the CLI commands; errors are echoed to stderr.
struct Sink {
  std::ostringstream out;
  Streams io() { return {out, std::cerr}; }
};

struct TrainedRun {
  int exit_code = 1;
  double seconds = 0.0;
  json metrics;
  json manifest;
  fs::path dir;
};

TrainedRun train_and_eval(const fs::path& work, const std::string& name, const json& config,
                          const std::string& problem) {
  TrainedRun run;
  run.dir = work / name;
  fs::create_directories(run.dir);
  json cfg = config;
  cfg["out"] = "out";
  const fs::path cfg_path = run.dir / "config.json";
  std::ofstream(cfg_path) << cfg.dump(2);
  std::cerr << "  training " << name << "...\n";
  Sink sink;
  const auto start = std::chrono::steady_clock::now();
  run.exit_code = cmd_train(cfg_path.string(), sink.io());
  run.seconds = seconds_since(start);
  if (run.exit_code == kExitError) return run;
  run.manifest = read_json(run.dir / "out" / "manifest.json");
  EvalOptions eval;
  eval.out_dir = (run.dir / "eval").string();
  if (cmd_eval((run.dir / "out" / "checkpoint.json").string(), problem, eval, sink.io()) == kExitOk) {
    run.metrics = read_json(run.dir / "eval" / "metrics.json");
  }
  return run;
}

double rel_of(const TrainedRun& run) {
  if (!run.metrics.contains("rel_Linf_err") || run.metrics["rel_Linf_err"].is_null()) return INFINITY;
  return run.metrics["rel_Linf_err"].get<double>();
}

Outcome criterion1() {
  Outcome o;
  o.pass = true;
  std::ostringstream d;
  for (const auto& id : builtin_problem_ids()) {
    const HJBProblem p = builtin_problem(id);
    const std::vector<int> counts = p.input_dim() == 1 ? std::vector<int>{10000} : std::vector<int>{100, 100};
    const double r = residual_check(p, jet_source(analytic(id)), probe_grid(p, counts)).max_abs;
    const bool ok = r < 1e-10;
    // The two examples without a derivation of their own may be flagged instead.
    if (!ok && id != "ex2" && id != "ex3") o.pass = false;
    d << id << " " << fmt(r) << (ok ? "" : " (unverified)") << "; ";
  }
  o.detail = "max |residual| on 1e4-point grids: " + d.str();
  return o;
}

Outcome criterion2() {
  const std::vector<NetworkSpec> specs{smooth_mlp_spec(2, {8, 6}), smooth_mlp_spec(2, {12}),
                                       convex_net_spec(2, 7, Activation::Softplus),
                                       partial_convex_net_spec(1, 6, Activation::Softplus, 3, 4, 5, 5)};
  double worst_grad = 0.0, worst_hess = 0.0, worst_param = 0.0;
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 20; ++k) {
    const ValueNetwork net(specs[k % specs.size()]);
    const ParamVector params = tu::random_params(net, rng);
    const bool timed = net.family() == Family::PartialConvexNet;
    const HJBProblem problem = builtin_problem(timed ? "ex4" : "ex1");
    for (int j = 0; j < 20; ++j) {
      Eigen::VectorXd x = tu::random_point(rng, net.input_dim());
      if (timed) x(0) = uniform(rng, 0.0, 10.0);
      const auto jet = eval_jet(net, params, x);
      const auto f = [&](const Eigen::VectorXd& y) { return forward(net, params, y); };
      worst_grad = std::max(worst_grad, tu::rel_err(jet.grad, tu::fd_gradient(f, x, 1e-6)));
      for (int i = 0; i < net.input_dim(); ++i) {
        const auto gi = [&](const Eigen::VectorXd& y) { return eval_jet(net, params, y, 1).grad(i); };
        worst_hess = std::max(worst_hess, tu::rel_err(jet.hess.row(i).transpose(), tu::fd_gradient(gi, x, 1e-6)));
      }
    }
    TrainConfig cfg;
    cfg.method = Method::Penalty;
    cfg.n_inner = cfg.n_boundary = cfg.n_hessian = 20;
    const std::vector<LossPart> parts = method1_parts(problem, sample_batch(problem, cfg, rng));
    const Eigen::VectorXd exact = loss_param_grad(net, params, parts).value.grad;
    Eigen::VectorXd fd(params.size());
    for (Eigen::Index i = 0; i < params.size(); ++i) {
      ParamVector hi = params, lo = params;
      hi.values()(i) += 1e-5;
      lo.values()(i) -= 1e-5;
      fd(i) = (loss_value(net, hi, parts).total() - loss_value(net, lo, parts).total()) / 2e-5;
    }
    worst_param = std::max(worst_param, tu::rel_err(exact, fd));
  }
  Outcome o;
  o.pass = worst_grad < 1e-6 && worst_hess < 1e-6 && worst_param < 1e-4;
  o.detail = "20 nets x 20 points; worst rel err gradient " + fmt(worst_grad) + ", Hessian " + fmt(worst_hess) +
             ", Method-1 parameter gradient " + fmt(worst_param);
  return o;
}

Outcome criterion3(const std::vector<std::pair<std::string, TrainedRun>>& trained) {
  Outcome o;
  o.pass = true;
  std::ostringstream d;
  auto audit = [&](const std::string& label, const ValueNetwork& net, const ParamVector& params,
                   const HJBProblem& problem) {
    auto rng = SeedStreams(7).stream("audit");
    const ConvexityReport r = convexity_audit(net, params, problem, 10000, rng);
    if (r.violations != 0) o.pass = false;
    d << label << " " << r.violations << "; ";
  };
  std::mt19937_64 rng(33);
  const HJBProblem ex1 = builtin_problem("ex1");
  const HJBProblem ex4 = builtin_problem("ex4");
  for (Activation act : {Activation::Relu, Activation::Softplus}) {
    for (int k = 0; k < 3; ++k) {
      const ValueNetwork c(convex_net_spec(2, 16, act));
      audit("random convex_net/" + to_string(act), c, tu::random_params(c, rng), ex1);
      const ValueNetwork pc(partial_convex_net_spec(1, 16, act));
      audit("random partial_convex_net/" + to_string(act), pc, tu::random_params(pc, rng), ex4);
    }
  }
  for (const auto& [id, run] : trained) {
    if (run.exit_code == kExitError) {
      o.pass = false;
      d << "trained " << id << " missing; ";
      continue;
    }
    const Checkpoint ck = load_checkpoint(run.dir / "out" / "checkpoint.json");
    audit("trained " + id, ValueNetwork(ck.spec), ck.params, builtin_problem(id));
  }
  o.detail = "violations per 1e4-pair audit: " + d.str();
  return o;
}

Outcome criterion4() {
  Outcome o;
  o.pass = true;
  double worst = 0.0;
  std::mt19937_64 rng(44);
  for (const auto& id : builtin_problem_ids()) {
    const HJBProblem p = builtin_problem(id);
    const int n = p.state_dim();
    for (int k = 0; k < 1000; ++k) {
      const Eigen::VectorXd x = tu::random_point(rng, n);
      const Eigen::VectorXd p1 = tu::random_point(rng, n, -5, 5);
      const Eigen::VectorXd p2 = tu::random_point(rng, n, -5, 5);
      const double gap = 0.5 * (hamiltonian_min(p, x, p1) + hamiltonian_min(p, x, p2)) -
                         hamiltonian_min(p, x, 0.5 * (p1 + p2));
      worst = std::max(worst, gap);
    }
  }
  o.pass = worst <= 1e-12;
  o.detail = "1e3 triples per problem; worst midpoint excess " + fmt(worst);
  return o;
}

Outcome criterion5() {
  std::mt19937_64 rng(55);
  int agree = 0, total = 0, positive = 0;
  for (int n : {2, 3}) {
    for (int k = 0; k < 100; ++k) {
      Eigen::MatrixXd a(n, n);
      for (int i = 0; i < n * n; ++i) a(i / n, i % n) = uniform(rng, -1, 1);
      const Eigen::MatrixXd h = 0.5 * (a + a.transpose()) + uniform(rng, 0.0, 1.5) * Eigen::MatrixXd::Identity(n, n);
      const bool eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().minCoeff() > 0;
      agree += minors_positive(h) == eig;
      positive += eig;
      ++total;
    }
  }
  Outcome o;
  o.pass = agree == total;
  o.detail = std::to_string(agree) + "/" + std::to_string(total) + " agree (" + std::to_string(positive) +
             " positive definite)";
  return o;
}

Outcome criterion6(const std::map<std::string, TrainedRun>& runs) {
  const std::map<std::string, double> tol{{"ex1", 0.05}, {"ex2", 0.05}, {"ex3", 0.15}};
  Outcome o;
  o.pass = true;
  std::ostringstream d;
  for (const auto& [id, limit] : tol) {
    const TrainedRun& r = runs.at(id);
    const double rel = rel_of(r);
    const bool ok = rel <= limit && r.seconds <= 300.0;
    o.pass = o.pass && ok;
    d << id << " rel " << fmt(rel) << " (<= " << limit << ") in " << fmt(r.seconds) << " s, exit " << r.exit_code
      << "; ";
  }
  o.detail = d.str();
  return o;
}

// Parses history.csv rows as (strip_index, epoch, lambda).
struct HistRow {
  int strip;
  long epoch;
  double lambda;
};

std::vector<HistRow> read_history(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<HistRow> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream s(line);
    for (std::string cell; std::getline(s, cell, ',');) f.push_back(cell);
    rows.push_back({std::stoi(f[1]), std::stol(f[2]), std::stod(f[7])});
  }
  return rows;
}

Outcome criterion7(const TrainedRun& run, double lambda_large) {
  Outcome o;
  if (run.exit_code == kExitError) {
    o.detail = "training failed to start";
    return o;
  }
  const double rel = rel_of(run);
  // Lambda-phase ordering within every strip.
  bool ordered = true;
  std::map<int, long> last_large, first_unit;
  for (const auto& r : read_history(run.dir / "out" / "history.csv")) {
    if (r.strip < 0) continue;
    if (r.lambda == lambda_large) last_large[r.strip] = r.epoch;
    if (r.lambda == 1.0 && !first_unit.count(r.strip)) first_unit[r.strip] = r.epoch;
  }
  for (const auto& [s, e] : first_unit) {
    if (last_large.count(s) && e < last_large[s]) ordered = false;
  }
  // Region [t_lo, T] of each strip strictly contains the previous one.
  bool growing = true;
  const json& strips = run.manifest["strip_records"];
  for (std::size_t k = 1; k < strips.size(); ++k) {
    if (!(strips[k]["t_lo"].get<double>() < strips[k - 1]["t_lo"].get<double>())) growing = false;
  }
  const bool reaches_zero = !strips.empty() && strips.back()["t_lo"].get<double>() == 0.0;
  o.pass = rel <= 0.05 && ordered && growing && reaches_zero;
  o.detail = "rel " + fmt(rel) + " (<= 0.05) on 21x41, " + std::to_string(strips.size()) + " strips, status " +
             run.manifest.value("status", "?") + ", lambda ordering " + (ordered ? "ok" : "broken") +
             ", monotone growth " + (growing && reaches_zero ? "ok" : "broken") + ", " + fmt(run.seconds) + " s";
  return o;
}

Outcome criterion8(const TrainedRun& m2, const TrainedRun& m1) {
  Outcome o;
  o.gating = false;
  o.pass = rel_of(m2) <= rel_of(m1);
  o.detail = "ex1, same epoch cap and batch size: convex net rel " + fmt(rel_of(m2)) + " in " + fmt(m2.seconds) +
             " s, Hessian penalty rel " + fmt(rel_of(m1)) + " in " + fmt(m1.seconds) + " s";
  return o;
}

Outcome criterion9() {
  const HJBProblem ex4 = builtin_problem("ex4");
  const AnalyticSolution exact = analytic("ex4");
  std::vector<double> errs;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    ViscosityFdOptions opt;
    opt.eps = eps;
    opt.t_start = 8.0;
    opt.boundary = [&](double t, double x) { return exact.value(Eigen::Vector2d(t, x)); };
    const GridSolution g = vanishing_viscosity_fd(ex4, opt);
    double err = 0.0, scale = 0.0;
    for (Eigen::Index k = 0; k < g.t.size(); ++k) {
      for (Eigen::Index i = 0; i < g.x.size(); ++i) {
        const double v = exact.value(Eigen::Vector2d(g.t(k), g.x(i)));
        scale = std::max(scale, std::abs(v));
        if (i > 0 && i + 1 < g.x.size()) err = std::max(err, std::abs(g.values(k, i) - v));
      }
    }
    errs.push_back(err / scale);
  }
  Outcome o;
  o.pass = errs[1] <= errs[0] && errs[2] <= errs[1] && errs[2] <= 0.02;
  o.detail = "rel err at eps 1e-2, 1e-3, 1e-4: " + fmt(errs[0]) + ", " + fmt(errs[1]) + ", " + fmt(errs[2]);
  return o;
}

Outcome criterion10() {
  std::mt19937_64 rng(1010);
  double worst = 0.0;
  bool signs = true;
  for (int k = 0; k < 100; ++k) {
    const double a = uniform(rng, -5, 5);
    double b = uniform(rng, -5, 5);
    if (std::abs(b) < 1e-3) b = 1.0;
    const double kc = riccati_convex(a, b);
    const double kr = riccati_concave(a, b);
    signs = signs && kc > 0.0 && kr < 0.0;
    worst = std::max(worst, std::abs(b * b * kc * kc - 2 * a * kc - 1));
  }
  Outcome o;
  o.pass = signs && worst <= 1e-12;
  o.detail = "100 (a, b); worst |b^2k^2 - 2ak - 1| " + fmt(worst) + ", signs " + (signs ? "ok" : "wrong");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::current_path() / "acceptance_runs";
  fs::remove_all(work);
  fs::create_directories(work);
  const auto start = std::chrono::steady_clock::now();

  std::map<std::string, TrainedRun> runs;
  for (const char* id : {"ex1", "ex2", "ex3"}) runs[id] = train_and_eval(work, id, json{{"problem", id}}, id);
  const json ex4_cfg{{"problem", "ex4"}, {"strips", {{"t_ini", 9.0}, {"dt", 0.5}}}};
  runs["ex4"] = train_and_eval(work, "ex4", ex4_cfg, "ex4");
  const TrainedRun m1 = train_and_eval(work, "ex1_penalty", json{{"problem", "ex1"}, {"method", "penalty"}}, "ex1");

  std::vector<std::pair<std::string, TrainedRun>> trained;
  for (const char* id : {"ex1", "ex2", "ex3", "ex4"}) trained.emplace_back(id, runs[id]);

  const std::vector<std::pair<std::string, Outcome>> results{
      {"oracle transcription", criterion1()},
      {"autodiff derivative checks", criterion2()},
      {"convexity by construction", criterion3(trained)},
      {"Hamiltonian concavity", criterion4()},
      {"Sylvester equivalence", criterion5()},
      {"end-to-end ex1/ex2/ex3", criterion6(runs)},
      {"end-to-end ex4 strip training", criterion7(runs["ex4"], TrainConfig{}.lambda_large)},
      {"method ordering on ex1 (informational)", criterion8(runs["ex1"], m1)},
      {"vanishing-viscosity oracle", criterion9()},
      {"Riccati root selection", criterion10()},
  };

  bool ok = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& [name, r] = results[i];
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << name << "): " << r.detail << '\n';
    if (r.gating && !r.pass) ok = false;
  }
  std::cout << "total " << fmt(seconds_since(start), 4) << " s\n";
  return ok ? 0 : 1;
}
