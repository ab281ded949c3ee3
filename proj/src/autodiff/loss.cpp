#include "vhjb/autodiff/loss.hpp"

#include "vhjb/networks/network.hpp"

#include <cmath>
#include <sstream>

namespace vhjb {

namespace {

void check_term(double value, const LossPart& part) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "loss term evaluated to " << value << " over " << part.inputs.cols() << " points";
    throw NonFiniteLoss(msg.str());
  }
}

}  // namespace

void require_finite(const Eigen::VectorXd& values, const Eigen::MatrixXd& inputs, const std::string& what) {
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (std::isfinite(values(j))) continue;
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " is " << values(j) << " at point (";
    for (Eigen::Index d = 0; d < inputs.rows(); ++d) msg << (d ? ", " : "") << inputs(d, j);
    msg << ")";
    throw NonFiniteLoss(msg.str());
  }
}

CompositeLossGrad loss_param_grad(const ValueNetwork& net, const ParamVector& params, std::span<const LossPart> parts) {
  net.check_params(params);
  CompositeLossGrad out;
  out.value.grad = Eigen::VectorXd::Zero(params.size());
  for (const LossPart& part : parts) {
    if (part.inputs.cols() == 0) continue;
    const Tape<double> tape = net.program().forward(params.values(), part.inputs, part.order);
    const JetBatch<double>& jets = tape.output();
    JetBatch<double> adjoint(1, jets.points(), jets.input_dim, part.order);
    const double value = part.term(part.inputs, jets, &adjoint);
    check_term(value, part);
    out.components.parts[static_cast<int>(part.category)] += value;
    net.program().backward(params.values(), tape, adjoint, out.value.grad);
  }
  for (Eigen::Index i = 0; i < out.value.grad.size(); ++i) {
    if (!std::isfinite(out.value.grad(i))) {
      throw NonFiniteLoss("parameter gradient entry " + std::to_string(i) + " is not finite");
    }
  }
  out.value.loss = out.components.total();
  return out;
}

LossComponents loss_value(const ValueNetwork& net, const ParamVector& params, std::span<const LossPart> parts) {
  net.check_params(params);
  LossComponents out;
  for (const LossPart& part : parts) {
    if (part.inputs.cols() == 0) continue;
    const Tape<double> tape = net.program().forward(params.values(), part.inputs, part.order);
    const double value = part.term(part.inputs, tape.output(), nullptr);
    check_term(value, part);
    out.parts[static_cast<int>(part.category)] += value;
  }
  return out;
}

}  // namespace vhjb
