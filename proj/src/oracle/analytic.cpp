#include "vhjb/oracle/analytic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vhjb {

namespace {

using Eigen::VectorXd;

Scalar2Jet<double> make_jet(int dim) { return Scalar2Jet<double>::zero(dim, true); }

void require_dim(const VectorXd& input, int dim, std::string_view id) {
  if (input.size() != dim) throw DimensionMismatch("analytic solution '" + std::string(id) + "' expects input dim " +
                                                   std::to_string(dim));
}

}  // namespace

JetBatch<double> AnalyticSolution::batch(const Eigen::MatrixXd& inputs, int order) const {
  JetBatch<double> out(1, inputs.cols(), input_dim, order);
  for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
    const Scalar2Jet<double> s = jet(inputs.col(j));
    out.val(0, j) = s.value;
    if (order >= 1) {
      for (int d = 0; d < input_dim; ++d) out.grad[d](0, j) = s.grad(d);
    }
    if (order >= 2) {
      for (int a = 0; a < input_dim; ++a) {
        for (int b = a; b < input_dim; ++b) out.hess[packed_index(a, b, input_dim)](0, j) = s.hess(a, b);
      }
    }
  }
  return out;
}

double riccati_convex(double a, double b) {
  if (b == 0.0) throw std::invalid_argument("riccati_convex: input map b must be nonzero");
  // (a + h) / b^2 = 1 / (h - a); pick the form without cancellation.
  const double h = std::hypot(a, b);
  return a >= 0.0 ? (a + h) / (b * b) : 1.0 / (h - a);
}

double riccati_concave(double a, double b) {
  if (b == 0.0) throw std::invalid_argument("riccati_concave: input map b must be nonzero");
  const double h = std::hypot(a, b);
  return a <= 0.0 ? (a - h) / (b * b) : -1.0 / (h + a);
}

AnalyticSolution analytic(std::string_view id, const BuiltinOptions& options) {
  AnalyticSolution sol;
  sol.id = std::string(id);
  if (id == "motivation") {
    const double k = riccati_convex(options.a, options.b);
    sol.input_dim = 1;
    sol.jet = [k, name = sol.id](const VectorXd& in) {
      require_dim(in, 1, name);
      auto j = make_jet(1);
      j.value = k * in(0) * in(0);
      j.grad(0) = 2.0 * k * in(0);
      j.hess(0, 0) = 2.0 * k;
      return j;
    };
    return sol;
  }
  if (id == "ex1" || id == "ex2") {
    sol.input_dim = 2;
    sol.jet = [name = sol.id](const VectorXd& in) {
      require_dim(in, 2, name);
      auto j = make_jet(2);
      j.value = 0.5 * in(0) * in(0) + in(1) * in(1);
      j.grad << in(0), 2.0 * in(1);
      j.hess(0, 0) = 1.0;
      j.hess(1, 1) = 2.0;
      return j;
    };
    return sol;
  }
  if (id == "ex3") {
    sol.input_dim = 2;
    sol.jet = [name = sol.id](const VectorXd& in) {
      require_dim(in, 2, name);
      const double x1 = in(0);
      const double x2 = in(1);
      const double g = std::numbers::pi / 2.0 + std::atan(5.0 * x1);
      const double q = 1.0 + 25.0 * x1 * x1;
      auto j = make_jet(2);
      j.value = x1 * x1 * g + x2 * x2;
      j.grad << 2.0 * x1 * g + 5.0 * x1 * x1 / q, 2.0 * x2;
      j.hess(0, 0) = 2.0 * g + 10.0 * x1 / q + 10.0 * x1 / (q * q);
      j.hess(1, 1) = 2.0;
      return j;
    };
    return sol;
  }
  if (id == "ex4") {
    const double T = options.T;
    sol.input_dim = 2;
    sol.jet = [T, name = sol.id](const VectorXd& in) {
      require_dim(in, 2, name);
      const double t = in(0);
      const double x = in(1);
      const double e = std::exp(2.0 * t - 2.0 * T);
      const double s = 1.0 + e;
      auto j = make_jet(2);
      j.value = 2.0 * x * x / s;
      j.grad << -4.0 * x * x * e / (s * s), 4.0 * x / s;
      j.hess(0, 0) = -8.0 * x * x * e * (s - 2.0 * e) / (s * s * s);
      j.hess(0, 1) = -8.0 * x * e / (s * s);
      j.hess(1, 0) = j.hess(0, 1);
      j.hess(1, 1) = 4.0 / s;
      return j;
    };
    return sol;
  }
  throw std::invalid_argument("no analytic solution for '" + std::string(id) + "'");
}

}  // namespace vhjb
