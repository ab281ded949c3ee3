#include "vhjb/training/losses.hpp"

#include "vhjb/networks/network.hpp"
#include "vhjb/training/minors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace vhjb {

LossPart residual_part(const HJBProblem& problem, Eigen::MatrixXd inputs, double weight) {
  LossPart part;
  part.category = LossCategory::Residual;
  part.order = 1;
  part.inputs = std::move(inputs);
  part.term = [&problem, weight](const Eigen::MatrixXd& pts, const JetBatch<double>& out,
                                 JetBatch<double>* adjoint) {
    const Eigen::Index n = pts.cols();
    if (n == 0) return 0.0;
    const ResidualBatch r = residual_batch(problem, pts, out, adjoint != nullptr);
    require_finite(r.value, pts, "HJB residual");
    const double scale = weight / static_cast<double>(n);
    if (adjoint) {
      const Eigen::RowVectorXd coeff = 2.0 * scale * r.value.transpose();
      for (int d = 0; d < out.input_dim; ++d) {
        adjoint->grad[d].row(0).array() += coeff.array() * r.d_grad.row(d).array();
      }
    }
    return scale * r.value.squaredNorm();
  };
  return part;
}

LossPart boundary_part(Eigen::MatrixXd inputs, Eigen::VectorXd targets, double weight) {
  if (targets.size() != inputs.cols()) throw DimensionMismatch("boundary targets do not match boundary points");
  LossPart part;
  part.category = LossCategory::Boundary;
  part.order = 0;
  part.inputs = std::move(inputs);
  part.term = [weight, targets = std::move(targets)](const Eigen::MatrixXd& pts, const JetBatch<double>& out,
                                                    JetBatch<double>* adjoint) {
    const Eigen::Index n = targets.size();
    if (n == 0) return 0.0;
    const Eigen::VectorXd diff = out.val.row(0).transpose() - targets;
    require_finite(diff, pts, "boundary error");
    const double scale = weight / static_cast<double>(n);
    if (adjoint) adjoint->val.row(0) += 2.0 * scale * diff.transpose();
    return scale * diff.squaredNorm();
  };
  return part;
}

LossPart penalty_part(const HJBProblem& problem, Eigen::MatrixXd inputs, double weight) {
  LossPart part;
  part.category = LossCategory::Penalty;
  part.order = 2;
  part.inputs = std::move(inputs);
  const int off = problem.state_offset();
  const int n = problem.state_dim();
  part.term = [off, n, weight](const Eigen::MatrixXd& pts, const JetBatch<double>& out, JetBatch<double>* adjoint) {
    const Eigen::Index points = out.points();
    if (points == 0) return 0.0;
    const int dim = out.input_dim;
    const double scale = weight / static_cast<double>(points);
    double total = 0.0;
    Eigen::MatrixXd h(n, n);
    Eigen::VectorXd per_point(points);
    for (Eigen::Index j = 0; j < points; ++j) {
      for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
          h(a, b) = h(b, a) = out.hess[packed_index(off + a, off + b, dim)](0, j);
        }
      }
      const Eigen::VectorXd minors = principal_minors(h);
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        const double neg = std::min(0.0, minors(k));
        if (neg == 0.0) continue;
        acc += neg * neg;
        if (adjoint) {
          const Eigen::MatrixXd cof = leading_minor_gradient(h, k + 1);
          const double c = 2.0 * scale * neg;
          for (int a = 0; a <= k; ++a) {
            for (int b = a; b <= k; ++b) {
              const double g = a == b ? cof(a, a) : cof(a, b) + cof(b, a);
              adjoint->hess[packed_index(off + a, off + b, dim)](0, j) += c * g;
            }
          }
        }
      }
      per_point(j) = acc;
      total += acc;
    }
    require_finite(per_point, pts, "Hessian minor penalty");
    return scale * total;
  };
  return part;
}

std::vector<LossPart> method1_parts(const HJBProblem& problem, const SampleBatch& batch) {
  std::vector<LossPart> parts;
  parts.push_back(residual_part(problem, batch.inner));
  parts.push_back(boundary_part(batch.boundary, batch.boundary_values));
  parts.push_back(penalty_part(problem, batch.hessian));
  return parts;
}

std::vector<LossPart> method2_parts(const HJBProblem& problem, const SampleBatch& batch, double lambda) {
  std::vector<LossPart> parts;
  parts.push_back(residual_part(problem, batch.inner));
  parts.push_back(boundary_part(batch.boundary, batch.boundary_values, lambda));
  return parts;
}

LossComponents evaluate_parts(const JetSource& source, const std::vector<LossPart>& parts) {
  LossComponents out;
  for (const auto& part : parts) {
    if (part.inputs.cols() == 0) continue;
    out.parts[static_cast<int>(part.category)] += part.term(part.inputs, source(part.inputs, part.order), nullptr);
  }
  return out;
}

LossComponents loss_method1(const ValueNetwork& net, const ParamVector& params, const HJBProblem& problem,
                            const SampleBatch& batch) {
  return loss_value(net, params, method1_parts(problem, batch));
}

LossComponents loss_method2(const ValueNetwork& net, const ParamVector& params, const HJBProblem& problem,
                            const SampleBatch& batch, double lambda) {
  return loss_value(net, params, method2_parts(problem, batch, lambda));
}

}  // namespace vhjb
