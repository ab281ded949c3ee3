#include "vhjb/hjb/problem.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace vhjb {

namespace {

void require_symmetric(const Eigen::MatrixXd& m, int dim, const std::string& what) {
  if (m.rows() != dim || m.cols() != dim) {
    throw std::invalid_argument(what + " must be " + std::to_string(dim) + "x" + std::to_string(dim));
  }
  if (!(m - m.transpose()).isZero(0.0)) throw std::invalid_argument(what + " is not symmetric");
}

double smallest_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

HJBProblem::HJBProblem(Definition def) : def_(std::move(def)) {
  const int n = def_.state_dim;
  const int m = def_.control_dim;
  if (n <= 0 || m <= 0) throw std::invalid_argument("state and control dimensions must be positive");
  if (!def_.drift_matrix || !def_.input_map) throw std::invalid_argument("dynamics are not set");
  require_symmetric(def_.Q, n, "Q");
  require_symmetric(def_.R, m, "R");
  const double q_min = smallest_eigenvalue(def_.Q);
  if (def_.allow_semidefinite_q ? q_min < -1e-14 : q_min <= 0.0) {
    throw std::invalid_argument(def_.allow_semidefinite_q ? "Q is not positive semidefinite"
                                                          : "Q is not positive definite");
  }
  if (smallest_eigenvalue(def_.R) <= 0.0) throw std::invalid_argument("R is not positive definite");
  if (def_.box_lo.size() != n || def_.box_hi.size() != n) throw std::invalid_argument("state box has wrong dimension");
  if ((def_.box_hi.array() <= def_.box_lo.array()).any()) throw std::invalid_argument("state box is empty");
  if (def_.horizon) {
    if (!(def_.horizon->T > 0.0)) throw std::invalid_argument("horizon T must be positive");
    if (!def_.horizon->terminal_cost) throw std::invalid_argument("finite horizon needs a terminal cost");
  }
  r_inv_ = def_.R.llt().solve(Eigen::MatrixXd::Identity(m, m));
}

double HJBProblem::horizon() const {
  if (!def_.horizon) throw std::logic_error("problem '" + def_.name + "' has an infinite horizon");
  return def_.horizon->T;
}

double HJBProblem::terminal_cost(const Eigen::VectorXd& x) const {
  if (!def_.horizon) throw std::logic_error("problem '" + def_.name + "' has no terminal cost");
  return def_.horizon->terminal_cost(x);
}

bool HJBProblem::contains(const Eigen::VectorXd& input, double slack) const {
  if (input.size() != input_dim()) return false;
  if (finite_horizon() && (input(0) < -slack || input(0) > horizon() + slack)) return false;
  const Eigen::VectorXd x = state_of(input);
  return ((x.array() >= def_.box_lo.array() - slack) && (x.array() <= def_.box_hi.array() + slack)).all();
}

Eigen::MatrixXd HJBProblem::drift_matrix(const Eigen::VectorXd& x) const {
  if (x.size() != state_dim()) throw DimensionMismatch("state has wrong dimension");
  return def_.drift_matrix(x);
}

Eigen::MatrixXd HJBProblem::input_map(const Eigen::VectorXd& x) const {
  if (x.size() != state_dim()) throw DimensionMismatch("state has wrong dimension");
  return def_.input_map(x);
}

Eigen::VectorXd HJBProblem::drift(const Eigen::VectorXd& x) const { return drift_matrix(x) * x; }

Eigen::MatrixXd HJBProblem::control_gain(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd b = input_map(x);
  return b * r_inv_ * b.transpose();
}

double hamiltonian_min(const HJBProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
  if (p.size() != problem.state_dim()) throw DimensionMismatch("costate has wrong dimension");
  return p.dot(problem.drift(x)) + x.dot(problem.Q() * x) - 0.25 * p.dot(problem.control_gain(x) * p);
}

double hamiltonian_at(const HJBProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& p,
                      const Eigen::VectorXd& u) {
  if (p.size() != problem.state_dim()) throw DimensionMismatch("costate has wrong dimension");
  if (u.size() != problem.control_dim()) throw DimensionMismatch("control has wrong dimension");
  const Eigen::VectorXd xdot = problem.drift(x) + problem.input_map(x) * u;
  return p.dot(xdot) + x.dot(problem.Q() * x) + u.dot(problem.R() * u);
}

Eigen::VectorXd optimal_control(const HJBProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
  if (p.size() != problem.state_dim()) throw DimensionMismatch("costate has wrong dimension");
  return -0.5 * problem.R_inverse() * problem.input_map(x).transpose() * p;
}

Eigen::VectorXd hamiltonian_costate_gradient(const HJBProblem& problem, const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& p) {
  return problem.drift(x) - 0.5 * problem.control_gain(x) * p;
}

Residual residual(const HJBProblem& problem, const Eigen::VectorXd& input, const Scalar2Jet<double>& jet) {
  if (input.size() != problem.input_dim() || jet.dim() != problem.input_dim()) {
    throw DimensionMismatch("jet layout does not match the problem's (t, x) layout");
  }
  const int off = problem.state_offset();
  const Eigen::VectorXd x = input.tail(problem.state_dim());
  const Eigen::VectorXd p = jet.grad.tail(problem.state_dim());
  Residual r;
  r.h_term = hamiltonian_min(problem, x, p);
  r.v_t_term = off == 1 ? jet.grad(0) : 0.0;
  r.value = r.v_t_term + r.h_term;
  return r;
}

ResidualBatch residual_batch(const HJBProblem& problem, const Eigen::MatrixXd& inputs, const JetBatch<double>& jets,
                             bool with_derivative) {
  const int dim = problem.input_dim();
  const int n = problem.state_dim();
  const int off = problem.state_offset();
  if (inputs.rows() != dim || jets.input_dim != dim || jets.order < 1 || jets.units() != 1 ||
      jets.points() != inputs.cols()) {
    throw DimensionMismatch("jet batch layout does not match the problem's (t, x) layout");
  }
  const Eigen::Index points = inputs.cols();
  ResidualBatch out;
  out.value.resize(points);
  if (with_derivative) out.d_grad = Eigen::MatrixXd::Zero(dim, points);
  Eigen::VectorXd p(n);
  for (Eigen::Index j = 0; j < points; ++j) {
    const Eigen::VectorXd x = inputs.col(j).tail(n);
    for (int i = 0; i < n; ++i) p(i) = jets.grad[off + i](0, j);
    const Eigen::VectorXd ax = problem.drift(x);
    const Eigen::MatrixXd gain = problem.control_gain(x);
    const Eigen::VectorXd gp = gain * p;
    double r = p.dot(ax) + x.dot(problem.Q() * x) - 0.25 * p.dot(gp);
    if (off == 1) r += jets.grad[0](0, j);
    out.value(j) = r;
    if (with_derivative) {
      if (off == 1) out.d_grad(0, j) = 1.0;
      out.d_grad.col(j).tail(n) = ax - 0.5 * gp;
    }
  }
  return out;
}

}  // namespace vhjb
