#pragma once

#include "vhjb/autodiff/param_vector.hpp"
#include "vhjb/hjb/problem.hpp"
#include "vhjb/networks/network.hpp"

#include <random>

namespace vhjb {

/// Slack allowed in V((x+y)/2) <= (V(x)+V(y))/2 before a pair counts as a violation.
inline constexpr double kConvexityTolerance = 1e-12;

struct ConvexityReport {
  long pairs = 0;
  long violations = 0;
  double max_violation = 0.0;  // largest V(mid) - mean, clipped below at 0
  // Worst pair; t is only meaningful for partially convex networks.
  Eigen::VectorXd worst_x;
  Eigen::VectorXd worst_y;
  double worst_t = 0.0;
};

/// Midpoint-convexity audit in x over the box [lo, hi]. For partially convex
/// networks every pair gets its own t drawn from [t_lo, t_hi].
/// Throws std::invalid_argument for SmoothMLP networks.
ConvexityReport convexity_audit(const ValueNetwork& net, const ParamVector& params, const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi, long pairs, std::mt19937_64& rng, double t_lo = 0.0,
                                double t_hi = 0.0);

/// Same audit over a problem's state box and time range.
ConvexityReport convexity_audit(const ValueNetwork& net, const ParamVector& params, const HJBProblem& problem,
                                long pairs, std::mt19937_64& rng);

/// Slack on each leading minor before a point counts as non-convex.
inline constexpr double kMinorTolerance = 1e-6;

struct MinorReport {
  long points = 0;
  long passing = 0;
  double fraction = 0.0;
  double worst_minor = 0.0;
  Eigen::VectorXd worst_point;
};

/// Samples `points` uniformly over the problem box and checks that every leading
/// principal minor of the state Hessian is >= -kMinorTolerance. Needs a C2 network.
MinorReport minor_audit(const ValueNetwork& net, const ParamVector& params, const HJBProblem& problem, long points,
                        std::mt19937_64& rng);

}  // namespace vhjb
