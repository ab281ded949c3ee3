#pragma once

#include "vhjb/networks/network.hpp"
#include "vhjb/util/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

namespace vhjb::tu {

/// max |a - b| / max |b|, the usual norm-wise relative error of a derivative check.
inline double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-12);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

/// Central-difference gradient of f at x.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

/// Smooth MLP [2, 2, 1] with square activation: V(x) = c1 x1^2 + c2 x2^2.
inline ValueNetwork quadratic_head(int dim = 2) {
  return ValueNetwork(smooth_mlp_spec(dim, {dim}, Activation::Square));
}

inline ParamVector quadratic_head_params(const ValueNetwork& net, const Eigen::VectorXd& coeffs) {
  ParamVector p = net.zero_params();
  p.matrix("W0").setIdentity();
  p.matrix("W1").row(0) = coeffs.transpose();
  return p;
}

inline Eigen::VectorXd random_point(std::mt19937_64& rng, int dim, double lo = -1.0, double hi = 1.0) {
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x(i) = uniform(rng, lo, hi);
  return x;
}

/// Random parameters with nonzero biases so derivative checks exercise every block.
inline ParamVector random_params(const ValueNetwork& net, std::mt19937_64& rng) {
  ParamVector p = net.init_params(rng);
  for (const auto& b : p.layout()) {
    if (!b.bias) continue;
    for (Eigen::Index i = b.offset; i < b.end(); ++i) p.values()(i) = uniform(rng, -0.5, 0.5);
  }
  if (net.convex_family()) project_positive_inplace(net, p);
  return p;
}

/// One representative of every network family and activation.
inline std::vector<NetworkSpec> smooth_specs() {
  return {smooth_mlp_spec(2, {8, 6}), smooth_mlp_spec(3, {5}), convex_net_spec(2, 7, Activation::Softplus),
          partial_convex_net_spec(1, 6, Activation::Softplus, 3, 4, 5, 5),
          partial_convex_net_spec(2, 5, Activation::Softplus, 3, 2, 4, 3)};
}

}  // namespace vhjb::tu
