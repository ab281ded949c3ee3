#include "vhjb/training/adam.hpp"

#include "vhjb/networks/network.hpp"

#include <cmath>

namespace vhjb {

void adam_update(AdamState& state, Eigen::Ref<Eigen::VectorXd> values, const Eigen::VectorXd& grad,
                 const AdamConfig& config) {
  if (grad.size() != values.size()) throw DimensionMismatch("adam: gradient/parameter length mismatch");
  if (state.m.size() != values.size()) state = AdamState::zeros(values.size());
  ++state.step;
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * grad;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  values.array() -= config.step * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + config.eps);
}

void adam_step(const ValueNetwork& net, AdamState& state, ParamVector& params, const Eigen::VectorXd& grad,
               const AdamConfig& config) {
  adam_update(state, params.values(), grad, config);
  if (net.convex_family()) project_positive_inplace(net, params);
}

}  // namespace vhjb
