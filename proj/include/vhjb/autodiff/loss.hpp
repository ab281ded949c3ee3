#pragma once

#include "vhjb/autodiff/jet.hpp"
#include "vhjb/autodiff/param_vector.hpp"

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace vhjb {

class ValueNetwork;

/// Which reported loss component a term contributes to.
enum class LossCategory { Residual = 0, Boundary = 1, Penalty = 2 };

/// Raised when a loss term produces a NaN or infinity; the message names the point.
class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Computes one loss contribution from the output jets `out` at the columns of
/// `inputs`. When `adjoint` is non-null, d(term)/d(jet) is added into it (it is
/// shaped like `out` and starts at zero).
using LossTermFn =
    std::function<double(const Eigen::MatrixXd& inputs, const JetBatch<double>& out, JetBatch<double>* adjoint)>;

/// One summand of a composite loss: a term evaluated on the output jets at `inputs`.
struct LossPart {
  LossCategory category = LossCategory::Residual;
  Eigen::MatrixXd inputs;  // input_dim x points
  int order = 1;
  LossTermFn term;
};

struct LossComponents {
  std::array<double, 3> parts{0.0, 0.0, 0.0};

  double residual() const { return parts[0]; }
  double boundary() const { return parts[1]; }
  double penalty() const { return parts[2]; }
  double total() const { return parts[0] + parts[1] + parts[2]; }
};

struct CompositeLossGrad {
  LossGrad value;
  LossComponents components;
};

/// Exact parameter gradient of the sum of `parts`. Empty parts (no points)
/// contribute 0.
CompositeLossGrad loss_param_grad(const ValueNetwork& net, const ParamVector& params, std::span<const LossPart> parts);

/// Same sum without the gradient.
LossComponents loss_value(const ValueNetwork& net, const ParamVector& params, std::span<const LossPart> parts);

/// Throws NonFiniteLoss naming the first non-finite entry of `values` and its input point.
void require_finite(const Eigen::VectorXd& values, const Eigen::MatrixXd& inputs, const std::string& what);

}  // namespace vhjb
