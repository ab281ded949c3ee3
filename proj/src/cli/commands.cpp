#include "vhjb/cli/commands.hpp"

#include "vhjb/cli/run_config.hpp"
#include "vhjb/hjb/builtin.hpp"
#include "vhjb/networks/checkpoint.hpp"
#include "vhjb/networks/convexity.hpp"
#include "vhjb/oracle/analytic.hpp"
#include "vhjb/oracle/residual_check.hpp"
#include "vhjb/oracle/viscosity_fd.hpp"
#include "vhjb/util/rng.hpp"

#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace vhjb {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct LoadedProblem {
  HJBProblem problem;
  std::optional<AnalyticSolution> solution;
};

LoadedProblem load_problem_with_oracle(const std::string& id_or_path) {
  const json doc = read_problem_document(id_or_path);
  LoadedProblem lp{problem_from_json(doc), std::nullopt};
  if (const auto ref = builtin_reference(doc)) lp.solution = analytic(ref->id, ref->options);
  return lp;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument("bad number '" + s + "' in " + what);
  return v;
}

std::vector<std::string> input_names(const HJBProblem& problem) {
  std::vector<std::string> names;
  if (problem.finite_horizon()) names.push_back("t");
  for (int i = 0; i < problem.state_dim(); ++i) {
    names.push_back(problem.state_dim() == 1 ? "x" : "x" + std::to_string(i + 1));
  }
  return names;
}

std::vector<int> default_counts(const HJBProblem& problem) {
  const int dim = problem.input_dim();
  if (dim == 1) return {101};
  if (dim == 2) return problem.finite_horizon() ? std::vector<int>{21, 41} : std::vector<int>{51, 51};
  return std::vector<int>(dim, 11);
}

std::vector<int> parse_counts(const std::string& spec, int dim) {
  const auto parts = split(spec, 'x');
  if (static_cast<int>(parts.size()) != dim) {
    throw std::invalid_argument("grid '" + spec + "' needs " + std::to_string(dim) + " counts");
  }
  std::vector<int> counts;
  for (const auto& p : parts) {
    const double v = parse_double(p, "grid");
    if (v < 1 || v != std::floor(v)) throw std::invalid_argument("grid counts must be positive integers");
    counts.push_back(static_cast<int>(v));
  }
  return counts;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Runs `body` and maps exceptions to exit status 1.
template <typename F>
int guarded(Streams io, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace

int cmd_train(const std::string& config_path, Streams io) {
  return guarded(io, [&] {
    RunConfig cfg = load_run_config(config_path);
    cfg.train.progress = [&io](const std::string& note) { io.out << note << std::endl; };
    const HJBProblem problem = cfg.problem();
    const ValueNetwork net(cfg.network);
    fs::create_directories(cfg.out_dir);

    const auto start = std::chrono::steady_clock::now();
    const TrainResult result = cfg.strips ? strip_train(problem, net, cfg.train, cfg.schedule(problem.horizon()))
                                          : train(problem, net, cfg.train);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    save_checkpoint(cfg.out_dir / "checkpoint.json", cfg.network, result.params);
    {
      std::ofstream hist(cfg.out_dir / "history.csv");
      write_history_csv(hist, result.history);
    }
    json manifest = cfg.to_json();
    manifest["status"] = result.converged() ? "converged" : "not_converged";
    manifest["message"] = result.message;
    manifest["epochs"] = result.history.rows.size();
    if (cfg.strips) {
      json strips = json::array();
      for (const auto& s : result.history.strips) {
        strips.push_back({{"index", s.index},
                          {"t_lo", s.t_lo},
                          {"converged", s.converged},
                          {"large_lambda_epochs", s.large_lambda_epochs},
                          {"unit_lambda_epochs", s.unit_lambda_epochs}});
      }
      manifest["strip_records"] = std::move(strips);
      manifest["stage1_boundary_error"] = result.history.stage1_boundary_error;
    }
    write_file(cfg.out_dir / "manifest.json", manifest.dump(2) + "\n");

    io.out << (result.converged() ? "converged" : "not converged") << ": " << result.message << " ("
           << std::fixed << std::setprecision(1) << seconds << " s)\n"
           << "wrote " << (cfg.out_dir / "checkpoint.json").string() << '\n';
    return result.converged() ? kExitOk : kExitNotConverged;
  });
}

int cmd_eval(const std::string& checkpoint, const std::string& problem_ref, const EvalOptions& options, Streams io) {
  return guarded(io, [&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    const LoadedProblem lp = load_problem_with_oracle(problem_ref);
    const HJBProblem& problem = lp.problem;
    const ValueNetwork net(ckpt.spec);
    const int dim = problem.input_dim();
    if (net.input_dim() != dim) {
      throw DimensionMismatch("checkpoint network takes " + std::to_string(net.input_dim()) + " inputs, problem '" +
                              problem.name() + "' has " + std::to_string(dim));
    }

    Eigen::VectorXd lo(dim), hi(dim);
    if (problem.finite_horizon()) {
      lo(0) = 0.0;
      hi(0) = problem.horizon();
    }
    lo.tail(problem.state_dim()) = problem.box_lo();
    hi.tail(problem.state_dim()) = problem.box_hi();
    if (!options.range.empty()) {
      const auto parts = split(options.range, ',');
      if (static_cast<int>(parts.size()) != dim) throw std::invalid_argument("range needs one lo:hi per input");
      for (int d = 0; d < dim; ++d) {
        const auto ends = split(parts[d], ':');
        if (ends.size() != 2) throw std::invalid_argument("range entries look like lo:hi");
        const double a = parse_double(ends[0], "range");
        const double b = parse_double(ends[1], "range");
        if (!(a <= b) || a < lo(d) || b > hi(d)) {
          throw std::invalid_argument("range " + parts[d] + " leaves the problem box [" + std::to_string(lo(d)) + ", " +
                                      std::to_string(hi(d)) + "]");
        }
        lo(d) = a;
        hi(d) = b;
      }
    }
    const std::vector<int> counts = options.grid.empty() ? default_counts(problem) : parse_counts(options.grid, dim);
    const Eigen::MatrixXd grid = tensor_grid(lo, hi, counts);

    const JetBatch<double> jets = jet_source(net, ckpt.params)(grid, 1);
    const Eigen::VectorXd residuals = residual_batch(problem, grid, jets, false).value;
    Eigen::VectorXd truth;
    if (lp.solution) {
      truth.resize(grid.cols());
      for (Eigen::Index j = 0; j < grid.cols(); ++j) truth(j) = lp.solution->value(grid.col(j));
    }

    const fs::path out_dir(options.out_dir);
    fs::create_directories(out_dir);
    std::ofstream csv(out_dir / "surface.csv");
    for (const auto& name : input_names(problem)) csv << name << ',';
    csv << "V_nn," << (lp.solution ? "V_true," : "") << "residual\n" << std::setprecision(17);
    for (Eigen::Index j = 0; j < grid.cols(); ++j) {
      for (int d = 0; d < dim; ++d) csv << grid(d, j) << ',';
      csv << jets.val(0, j) << ',';
      if (lp.solution) csv << truth(j) << ',';
      csv << residuals(j) << '\n';
    }

    json metrics;
    metrics["grid"] = counts;
    metrics["max_abs_residual"] = residuals.cwiseAbs().maxCoeff();
    if (lp.solution) {
      const double err = (jets.val.row(0).transpose() - truth).cwiseAbs().maxCoeff();
      metrics["max_abs_err"] = err;
      metrics["rel_Linf_err"] = err / truth.cwiseAbs().maxCoeff();
    } else {
      metrics["max_abs_err"] = nullptr;
      metrics["rel_Linf_err"] = nullptr;
    }
    if (net.convex_family()) {
      auto rng = SeedStreams(options.seed).stream("audit");
      metrics["convexity_violations"] = convexity_audit(net, ckpt.params, problem, options.audit_pairs, rng).violations;
    } else {
      metrics["convexity_violations"] = nullptr;
    }
    write_file(out_dir / "metrics.json", metrics.dump(2) + "\n");
    io.out << metrics.dump() << '\n';
    return kExitOk;
  });
}

int cmd_audit(const std::string& checkpoint, const std::string& problem_ref, const AuditOptions& options, Streams io) {
  return guarded(io, [&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    const HJBProblem problem = load_problem(problem_ref);
    const ValueNetwork net(ckpt.spec);
    if (net.input_dim() != problem.input_dim()) throw DimensionMismatch("checkpoint does not match the problem");
    if (options.pairs < 0) throw std::invalid_argument("pair count must be non-negative");
    auto rng = SeedStreams(options.seed).stream("audit");
    json report;
    bool pass = false;
    if (net.convex_family()) {
      const ConvexityReport r = convexity_audit(net, ckpt.params, problem, options.pairs, rng);
      pass = r.violations == 0;
      report = {{"kind", "midpoint_convexity"}, {"pairs", r.pairs},           {"violations", r.violations},
                {"tolerance", kConvexityTolerance}, {"max_violation", r.max_violation}};
      if (r.worst_x.size() > 0) {
        report["worst_pair"] = {{"x", vector_json(r.worst_x)}, {"y", vector_json(r.worst_y)}};
        if (net.family() == Family::PartialConvexNet) report["worst_pair"]["t"] = r.worst_t;
      }
    } else {
      const MinorReport r = minor_audit(net, ckpt.params, problem, options.pairs, rng);
      pass = r.fraction >= options.min_fraction;
      report = {{"kind", "leading_minors"},   {"points", r.points},         {"passing", r.passing},
                {"fraction", r.fraction},     {"tolerance", kMinorTolerance}, {"required_fraction", options.min_fraction},
                {"worst_minor", r.worst_minor}};
      if (r.worst_point.size() > 0) report["worst_point"] = vector_json(r.worst_point);
    }
    report["pass"] = pass;
    const fs::path out_dir(options.out_dir);
    fs::create_directories(out_dir);
    write_file(out_dir / "audit.json", report.dump(2) + "\n");
    io.out << report.dump() << '\n';
    return pass ? kExitOk : kExitAuditFailed;
  });
}

int cmd_oracle(const std::string& problem_ref, const OracleOptions& options, Streams io) {
  return guarded(io, [&] {
    const LoadedProblem lp = load_problem_with_oracle(problem_ref);
    const HJBProblem& problem = lp.problem;
    const fs::path out_dir(options.out_dir);
    fs::create_directories(out_dir);
    json report;
    report["problem"] = problem.name();

    if (options.fd_eps) {
      ViscosityFdOptions fd;
      fd.eps = *options.fd_eps;
      fd.nx = options.nx;
      fd.t_start = options.t_start;
      if (lp.solution) {
        const AnalyticSolution sol = *lp.solution;
        fd.boundary = [sol](double t, double x) { return sol.value(Eigen::Vector2d(t, x)); };
      }
      const GridSolution grid = vanishing_viscosity_fd(problem, fd);
      std::ofstream csv(out_dir / "fd.csv");
      write_grid_csv(csv, grid);
      report["eps"] = grid.eps;
      report["nx"] = grid.x.size();
      report["nt"] = grid.t.size() - 1;
      report["boundary_treatment"] = grid.boundary_treatment;
      if (lp.solution) {
        double err = 0.0, scale = 0.0;
        for (Eigen::Index k = 0; k < grid.t.size(); ++k) {
          for (Eigen::Index i = 0; i < grid.x.size(); ++i) {
            const double v = lp.solution->value(Eigen::Vector2d(grid.t(k), grid.x(i)));
            err = std::max(err, std::abs(grid.values(k, i) - v));
            scale = std::max(scale, std::abs(v));
          }
        }
        report["max_abs_err"] = err;
        report["rel_Linf_err"] = err / scale;
      }
      write_file(out_dir / "oracle.json", report.dump(2) + "\n");
      io.out << report.dump() << '\n';
      return kExitOk;
    }

    if (!lp.solution) throw std::invalid_argument("no analytic solution is known for '" + problem.name() + "'");
    const int dim = problem.input_dim();
    const std::vector<int> counts = dim == 1 ? std::vector<int>{10000} : std::vector<int>(dim, dim == 2 ? 100 : 22);
    const ResidualReport r = residual_check(problem, jet_source(*lp.solution), probe_grid(problem, counts));
    report["probe_points"] = r.residuals.size();
    report["max_abs_residual"] = r.max_abs;
    report["argmax"] = vector_json(r.argmax);
    report["verified"] = r.max_abs < 1e-10;
    if (const auto ref = builtin_reference(read_problem_document(problem_ref)); ref && ref->id == "motivation") {
      report["riccati_k"] = riccati_convex(ref->options.a, ref->options.b);
      report["rejected_root"] = riccati_concave(ref->options.a, ref->options.b);
    }
    write_file(out_dir / "oracle.json", report.dump(2) + "\n");
    io.out << report.dump() << '\n';
    return kExitOk;
  });
}

}  // namespace vhjb
