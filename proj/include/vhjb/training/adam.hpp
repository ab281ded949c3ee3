#pragma once

#include "vhjb/autodiff/param_vector.hpp"

#include <Eigen/Dense>

namespace vhjb {

class ValueNetwork;

struct AdamConfig {
  double step = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;

  static AdamState zeros(Eigen::Index n) { return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0}; }
};

/// Bias-corrected Adam update of `values` in place.
void adam_update(AdamState& state, Eigen::Ref<Eigen::VectorXd> values, const Eigen::VectorXd& grad,
                 const AdamConfig& config);

/// Adam update of a network's parameters followed by positivity projection for
/// convex families.
void adam_step(const ValueNetwork& net, AdamState& state, ParamVector& params, const Eigen::VectorXd& grad,
               const AdamConfig& config);

}  // namespace vhjb
