#include "vhjb/oracle/viscosity_fd.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>

namespace vhjb {

namespace {

struct Coefficients {
  Eigen::VectorXd drift;  // a(x) x
  Eigen::VectorXd state_cost;
  Eigen::VectorXd gain;   // b R^-1 b'
};

double max_step(double dx, double eps, double hp) {
  double dt = 0.4 * dx * dx / eps;
  if (hp > 0.0) {
    dt = std::min(dt, 0.4 * dx / hp);
    dt = std::min(dt, 0.8 * eps / (hp * hp));
  }
  return dt;
}

int steps_for(double span, double dt) { return static_cast<int>(std::ceil(span / dt - 1e-9)); }

// Largest |H_p| = |a x - 1/2 g p| over the slice, using central V_x in the interior.
double max_costate_speed(const Eigen::VectorXd& v, const Coefficients& c, double dx) {
  const auto nx = v.size();
  double hp = 0.0;
  for (Eigen::Index i = 0; i < nx; ++i) {
    double p;
    if (i == 0) {
      p = (v(1) - v(0)) / dx;
    } else if (i == nx - 1) {
      p = (v(nx - 1) - v(nx - 2)) / dx;
    } else {
      p = (v(i + 1) - v(i - 1)) / (2 * dx);
    }
    hp = std::max(hp, std::abs(c.drift(i) - 0.5 * c.gain(i) * p));
  }
  return hp;
}

// Returns the solution, or the step count needed when `nt` is too small.
std::optional<GridSolution> solve(const HJBProblem& problem, const ViscosityFdOptions& opt, const Eigen::VectorXd& xs,
                                  const Coefficients& c, int nt, int& required) {
  const double T = problem.horizon();
  const double span = T - opt.t_start;
  const double dt = span / nt;
  const double dx = xs(1) - xs(0);
  const auto nx = xs.size();

  GridSolution out;
  out.eps = opt.eps;
  out.x = xs;
  out.t.resize(nt + 1);
  out.values.resize(nt + 1, nx);
  out.boundary_treatment = opt.boundary ? "dirichlet-analytic" : "linear-extrapolation";
  for (int k = 0; k <= nt; ++k) out.t(k) = k == nt ? T : opt.t_start + span * static_cast<double>(k) / nt;
  for (Eigen::Index i = 0; i < nx; ++i) out.values(nt, i) = problem.terminal_cost(Eigen::VectorXd::Constant(1, xs(i)));

  Eigen::VectorXd v = out.values.row(nt).transpose();
  Eigen::VectorXd next(nx);
  for (int k = nt; k > 0; --k) {
    const double hp = max_costate_speed(v, c, dx);
    if (dt > max_step(dx, opt.eps, hp) * (1.0 + 1e-12)) {
      required = steps_for(span, max_step(dx, opt.eps, 1.25 * hp));
      return std::nullopt;
    }
    for (Eigen::Index i = 1; i + 1 < nx; ++i) {
      const double p = (v(i + 1) - v(i - 1)) / (2 * dx);
      const double vxx = (v(i + 1) - 2 * v(i) + v(i - 1)) / (dx * dx);
      const double h = p * c.drift(i) + c.state_cost(i) - 0.25 * c.gain(i) * p * p;
      next(i) = v(i) + dt * (h + opt.eps * vxx);
    }
    const double t_new = out.t(k - 1);
    if (opt.boundary) {
      next(0) = opt.boundary(t_new, xs(0));
      next(nx - 1) = opt.boundary(t_new, xs(nx - 1));
    } else {
      next(0) = 2 * next(1) - next(2);
      next(nx - 1) = 2 * next(nx - 2) - next(nx - 3);
    }
    if (!next.allFinite()) {
      throw std::runtime_error("vanishing_viscosity_fd: non-finite values at t = " + std::to_string(t_new));
    }
    v.swap(next);
    out.values.row(k - 1) = v.transpose();
  }
  return out;
}

}  // namespace

GridSolution vanishing_viscosity_fd(const HJBProblem& problem, const ViscosityFdOptions& options) {
  if (problem.state_dim() != 1) throw std::invalid_argument("vanishing_viscosity_fd needs one state dimension");
  if (!problem.finite_horizon()) throw std::invalid_argument("vanishing_viscosity_fd needs a finite horizon");
  if (!(options.eps > 0.0)) throw std::invalid_argument("vanishing_viscosity_fd needs eps > 0");
  if (options.nx < 4) throw std::invalid_argument("vanishing_viscosity_fd needs nx >= 4");
  if (!(options.t_start < problem.horizon())) throw std::invalid_argument("t_start must precede the horizon");

  const double lo = problem.box_lo()(0);
  const double hi = problem.box_hi()(0);
  Eigen::VectorXd xs(options.nx);
  for (int i = 0; i < options.nx; ++i) {
    xs(i) = i + 1 == options.nx ? hi : lo + (hi - lo) * static_cast<double>(i) / (options.nx - 1);
  }
  Coefficients c;
  c.drift.resize(options.nx);
  c.state_cost.resize(options.nx);
  c.gain.resize(options.nx);
  for (int i = 0; i < options.nx; ++i) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, xs(i));
    c.drift(i) = problem.drift(x)(0);
    c.state_cost(i) = x.dot(problem.Q() * x);
    c.gain(i) = problem.control_gain(x)(0, 0);
  }

  const double dx = xs(1) - xs(0);
  const double span = problem.horizon() - options.t_start;
  if (options.nt > 0) {
    int required = 0;
    if (auto result = solve(problem, options, xs, c, options.nt, required)) return std::move(*result);
    // The bound depends on the running solution, so the reported count comes from a full stable solve.
    ViscosityFdOptions automatic = options;
    automatic.nt = 0;
    required = static_cast<int>(vanishing_viscosity_fd(problem, automatic).t.size()) - 1;
    throw StabilityViolation("vanishing_viscosity_fd: nt = " + std::to_string(options.nt) +
                                 " violates the explicit stability bound; need nt >= " + std::to_string(required),
                             required);
  }
  Eigen::VectorXd terminal(options.nx);
  for (int i = 0; i < options.nx; ++i) terminal(i) = problem.terminal_cost(Eigen::VectorXd::Constant(1, xs(i)));
  int nt = std::max(1, steps_for(span, max_step(dx, options.eps, 1.25 * max_costate_speed(terminal, c, dx))));
  for (;;) {
    int required = 0;
    auto result = solve(problem, options, xs, c, nt, required);
    if (result) return std::move(*result);
    nt = std::max(required, nt + 1);
  }
}

void write_grid_csv(std::ostream& out, const GridSolution& grid) {
  out << "t,x,V_eps\n";
  out << std::setprecision(17);
  for (Eigen::Index k = 0; k < grid.t.size(); ++k) {
    for (Eigen::Index i = 0; i < grid.x.size(); ++i) {
      out << grid.t(k) << ',' << grid.x(i) << ',' << grid.values(k, i) << '\n';
    }
  }
}

}  // namespace vhjb
