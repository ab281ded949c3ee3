#pragma once

#include "vhjb/autodiff/jet.hpp"
#include "vhjb/autodiff/param_vector.hpp"
#include "vhjb/hjb/problem.hpp"
#include "vhjb/oracle/analytic.hpp"

#include <functional>
#include <vector>

namespace vhjb {

class ValueNetwork;

/// Produces output jets (units == 1) of some value function at the columns of `inputs`.
using JetSource = std::function<JetBatch<double>(const Eigen::MatrixXd& inputs, int order)>;

JetSource jet_source(const AnalyticSolution& solution);
/// The source keeps references; `net` and `params` must outlive it.
JetSource jet_source(const ValueNetwork& net, const ParamVector& params);

/// Tensor grid over the problem's (t, x) box with counts[d] points along input
/// coordinate d (endpoints included). Columns are points; the last coordinate varies fastest.
Eigen::MatrixXd probe_grid(const HJBProblem& problem, const std::vector<int>& counts);

/// Tensor grid over an explicit box.
Eigen::MatrixXd tensor_grid(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, const std::vector<int>& counts);

struct ResidualReport {
  double max_abs = 0.0;
  Eigen::VectorXd argmax;
  Eigen::VectorXd residuals;
};

ResidualReport residual_check(const HJBProblem& problem, const JetSource& source, const Eigen::MatrixXd& grid);

}  // namespace vhjb
