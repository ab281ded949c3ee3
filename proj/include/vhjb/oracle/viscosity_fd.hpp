#pragma once

#include "vhjb/hjb/problem.hpp"

#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace vhjb {

/// Grid values of the viscous approximation V_eps on [t_start, T] x [x_lo, x_hi].
/// `values(k, i)` is V_eps(t(k), x(i)); the last row is the terminal slice.
struct GridSolution {
  Eigen::VectorXd t;
  Eigen::VectorXd x;
  Eigen::MatrixXd values;
  double eps = 0.0;
  std::string boundary_treatment;
};

/// Raised when the requested time step violates the explicit scheme's stability bound.
class StabilityViolation : public std::runtime_error {
 public:
  StabilityViolation(const std::string& what, int required_steps)
      : std::runtime_error(what), required_steps_(required_steps) {}
  int required_steps() const { return required_steps_; }

 private:
  int required_steps_;
};

struct ViscosityFdOptions {
  double eps = 1e-3;
  int nx = 201;
  /// Number of time steps; 0 picks the smallest count meeting the stability bound.
  int nt = 0;
  double t_start = 0.0;
  /// Boundary values V(t, x) for the two end columns; when empty the end columns are
  /// extrapolated linearly (constant one-sided V_x).
  std::function<double(double t, double x)> boundary;
};

/// Solves V_t + H(x, V_x) + eps V_xx = 0 backward from V(T, .) = psi with explicit
/// Euler in reverse time, central V_x and second-difference V_xx. One state
/// dimension, finite horizon only.
///
/// The step must satisfy dt <= 0.4 dx^2 / eps, dt <= 0.4 dx / max|H_p| and
/// dt <= 0.8 eps / max|H_p|^2, with max|H_p| measured on the running solution.
GridSolution vanishing_viscosity_fd(const HJBProblem& problem, const ViscosityFdOptions& options);

/// Writes "t,x,V_eps" rows with 17 significant digits.
void write_grid_csv(std::ostream& out, const GridSolution& grid);

}  // namespace vhjb
