#pragma once

#include "vhjb/autodiff/jet.hpp"
#include "vhjb/hjb/builtin.hpp"
#include "vhjb/hjb/problem.hpp"

#include <functional>
#include <string>
#include <string_view>

namespace vhjb {

/// Closed-form value function with closed-form gradient and Hessian.
struct AnalyticSolution {
  std::string id;
  int input_dim = 0;
  std::function<Scalar2Jet<double>(const Eigen::VectorXd& input)> jet;

  double value(const Eigen::VectorXd& input) const { return jet(input).value; }
  Eigen::VectorXd gradient(const Eigen::VectorXd& input) const { return jet(input).grad; }

  /// Jets of the solution at the columns of `inputs`, shaped like a network output.
  JetBatch<double> batch(const Eigen::MatrixXd& inputs, int order) const;
};

/// Known solutions of the builtin problems (same ids and options as builtin_problem).
AnalyticSolution analytic(std::string_view id, const BuiltinOptions& options = {});

/// Coefficient k of V(x) = k x^2 for x' = a x + b u with cost x^2 + u^2: the
/// convex root (a + sqrt(a^2 + b^2)) / b^2. Throws std::invalid_argument for b == 0.
double riccati_convex(double a, double b);

/// The other root (a - sqrt(a^2 + b^2)) / b^2, which gives a concave V.
double riccati_concave(double a, double b);

}  // namespace vhjb
