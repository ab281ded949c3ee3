#pragma once

#include "vhjb/autodiff/jet.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

namespace vhjb {

/// x -> matrix; used for the drift matrix a(x) (n x n) and the input map b(x) (n x m).
using MatrixField = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using ScalarField = std::function<double(const Eigen::VectorXd&)>;

struct FiniteHorizon {
  double T = 1.0;
  ScalarField terminal_cost;  // psi(x)
};

/// Optimal control problem for the affine system  x' = a(x) x + b(x) u  with running
/// cost x'Qx + u'Ru, an unconstrained control set, and either an infinite horizon or
/// a finite horizon [0, T] with terminal cost psi.
///
/// Network inputs are laid out as (t, x_1..x_n) for finite horizons and (x_1..x_n)
/// otherwise.
class HJBProblem {
 public:
  struct Definition {
    std::string name;
    int state_dim = 1;
    int control_dim = 1;
    MatrixField drift_matrix;
    MatrixField input_map;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;
    std::optional<FiniteHorizon> horizon;
    Eigen::VectorXd box_lo;
    Eigen::VectorXd box_hi;
    // Accept Q with zero eigenvalues (problems whose running cost ignores part of the state).
    bool allow_semidefinite_q = false;
  };

  /// Validates symmetry and definiteness of Q and R and the box; throws std::invalid_argument.
  explicit HJBProblem(Definition def);

  const std::string& name() const { return def_.name; }
  int state_dim() const { return def_.state_dim; }
  int control_dim() const { return def_.control_dim; }
  const Eigen::MatrixXd& Q() const { return def_.Q; }
  const Eigen::MatrixXd& R() const { return def_.R; }
  const Eigen::MatrixXd& R_inverse() const { return r_inv_; }
  const Eigen::VectorXd& box_lo() const { return def_.box_lo; }
  const Eigen::VectorXd& box_hi() const { return def_.box_hi; }
  bool allows_semidefinite_q() const { return def_.allow_semidefinite_q; }

  bool finite_horizon() const { return def_.horizon.has_value(); }
  double horizon() const;
  double terminal_cost(const Eigen::VectorXd& x) const;

  /// 1 + n for finite horizons, n otherwise.
  int input_dim() const { return state_dim() + state_offset(); }
  /// Index of x_1 in a network input.
  int state_offset() const { return finite_horizon() ? 1 : 0; }
  /// Splits the state out of a network input.
  Eigen::VectorXd state_of(const Eigen::VectorXd& input) const { return input.tail(state_dim()); }
  bool contains(const Eigen::VectorXd& input, double slack = 0.0) const;

  Eigen::MatrixXd drift_matrix(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd input_map(const Eigen::VectorXd& x) const;
  /// a(x) x
  Eigen::VectorXd drift(const Eigen::VectorXd& x) const;
  /// b(x) R^-1 b(x)^T
  Eigen::MatrixXd control_gain(const Eigen::VectorXd& x) const;

 private:
  Definition def_;
  Eigen::MatrixXd r_inv_;
};

/// Residual of the HJB equation at one point. `value = v_t_term + h_term`; the time
/// term is identically zero for infinite horizons.
struct Residual {
  double value = 0.0;
  double h_term = 0.0;
  double v_t_term = 0.0;
};

/// min over u of p (a(x)x + b(x)u) + x'Qx + u'Ru, from the explicit minimizer:
///   p a(x) x + x'Qx - 1/4 p b R^-1 b' p'.
double hamiltonian_min(const HJBProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& p);

/// The integrand p (a(x)x + b(x)u) + x'Qx + u'Ru for a given control.
double hamiltonian_at(const HJBProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& p,
                      const Eigen::VectorXd& u);

/// u* = -1/2 R^-1 b(x)' p'.
Eigen::VectorXd optimal_control(const HJBProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& p);

/// d hamiltonian_min / dp = a(x)x - 1/2 b R^-1 b' p.
Eigen::VectorXd hamiltonian_costate_gradient(const HJBProblem& problem, const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& p);

/// HJB residual of a value-function jet taken at network input `input`.
Residual residual(const HJBProblem& problem, const Eigen::VectorXd& input, const Scalar2Jet<double>& jet);

/// Residuals of a batch of output jets (units == 1) at the columns of `inputs`,
/// and d(residual)/d(grad) per point (input_dim x points) when requested.
struct ResidualBatch {
  Eigen::VectorXd value;
  Eigen::MatrixXd d_grad;
};
ResidualBatch residual_batch(const HJBProblem& problem, const Eigen::MatrixXd& inputs, const JetBatch<double>& jets,
                             bool with_derivative);

}  // namespace vhjb
