#include "vhjb/oracle/residual_check.hpp"

#include "vhjb/networks/network.hpp"

#include <cmath>
#include <stdexcept>

namespace vhjb {

JetSource jet_source(const AnalyticSolution& solution) {
  return [solution](const Eigen::MatrixXd& inputs, int order) { return solution.batch(inputs, order); };
}

JetSource jet_source(const ValueNetwork& net, const ParamVector& params) {
  return [&net, &params](const Eigen::MatrixXd& inputs, int order) {
    return net.evaluate(params, inputs, order).output();
  };
}

Eigen::MatrixXd tensor_grid(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, const std::vector<int>& counts) {
  const auto dim = lo.size();
  if (hi.size() != dim || static_cast<Eigen::Index>(counts.size()) != dim) {
    throw DimensionMismatch("grid counts do not match the box dimension");
  }
  Eigen::Index total = 1;
  for (int c : counts) {
    if (c < 1) throw std::invalid_argument("grid counts must be positive");
    total *= c;
  }
  Eigen::MatrixXd grid(dim, total);
  for (Eigen::Index k = 0; k < total; ++k) {
    Eigen::Index rem = k;
    for (Eigen::Index d = dim - 1; d >= 0; --d) {
      const int c = counts[d];
      const Eigen::Index idx = rem % c;
      rem /= c;
      grid(d, k) = c == 1 ? lo(d) : lo(d) + (hi(d) - lo(d)) * static_cast<double>(idx) / (c - 1);
    }
  }
  return grid;
}

Eigen::MatrixXd probe_grid(const HJBProblem& problem, const std::vector<int>& counts) {
  const int dim = problem.input_dim();
  Eigen::VectorXd lo(dim), hi(dim);
  if (problem.finite_horizon()) {
    lo(0) = 0.0;
    hi(0) = problem.horizon();
  }
  lo.tail(problem.state_dim()) = problem.box_lo();
  hi.tail(problem.state_dim()) = problem.box_hi();
  return tensor_grid(lo, hi, counts);
}

ResidualReport residual_check(const HJBProblem& problem, const JetSource& source, const Eigen::MatrixXd& grid) {
  ResidualReport report;
  if (grid.cols() == 0) return report;
  const JetBatch<double> jets = source(grid, 1);
  report.residuals = residual_batch(problem, grid, jets, false).value;
  Eigen::Index arg = 0;
  for (Eigen::Index j = 0; j < grid.cols(); ++j) {
    const double r = std::abs(report.residuals(j));
    if (!(r <= report.max_abs)) {
      report.max_abs = r;
      arg = j;
    }
  }
  report.argmax = grid.col(arg);
  return report;
}

}  // namespace vhjb
