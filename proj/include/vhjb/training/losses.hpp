#pragma once

#include "vhjb/autodiff/loss.hpp"
#include "vhjb/hjb/problem.hpp"
#include "vhjb/oracle/residual_check.hpp"

#include <vector>

namespace vhjb {

class ValueNetwork;

/// Collocation points for one loss evaluation, each a column in the problem's
/// (t, x) input layout.
struct SampleBatch {
  Eigen::MatrixXd inner;
  Eigen::MatrixXd boundary;
  Eigen::VectorXd boundary_values;
  Eigen::MatrixXd hessian;
};

/// weight * mean over columns of |V_t + H(x, V_x)|^2.
LossPart residual_part(const HJBProblem& problem, Eigen::MatrixXd inputs, double weight = 1.0);

/// weight * mean over columns of |V - target|^2.
LossPart boundary_part(Eigen::MatrixXd inputs, Eigen::VectorXd targets, double weight = 1.0);

/// weight * mean over columns of sum_k |min(0, M_k)|^2, with M_k the k-th leading
/// principal minor of the input-Hessian of V restricted to the state block.
LossPart penalty_part(const HJBProblem& problem, Eigen::MatrixXd inputs, double weight = 1.0);

/// Residual mean-square + boundary mean-square + minor penalty (Hessian-penalty method).
std::vector<LossPart> method1_parts(const HJBProblem& problem, const SampleBatch& batch);

/// lambda * boundary mean-square + residual mean-square (convex-network method).
std::vector<LossPart> method2_parts(const HJBProblem& problem, const SampleBatch& batch, double lambda);

/// Evaluates loss parts on an arbitrary jet source, e.g. an analytic solution.
LossComponents evaluate_parts(const JetSource& source, const std::vector<LossPart>& parts);

LossComponents loss_method1(const ValueNetwork& net, const ParamVector& params, const HJBProblem& problem,
                            const SampleBatch& batch);
LossComponents loss_method2(const ValueNetwork& net, const ParamVector& params, const HJBProblem& problem,
                            const SampleBatch& batch, double lambda);

}  // namespace vhjb
