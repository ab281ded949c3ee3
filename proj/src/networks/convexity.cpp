#include "vhjb/networks/convexity.hpp"

#include "vhjb/autodiff/jet.hpp"
#include "vhjb/training/minors.hpp"
#include "vhjb/util/rng.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace vhjb {

namespace {

constexpr long kChunk = 4096;

}  // namespace

ConvexityReport convexity_audit(const ValueNetwork& net, const ParamVector& params, const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi, long pairs, std::mt19937_64& rng, double t_lo,
                                double t_hi) {
  if (!net.convex_family()) throw std::invalid_argument("convexity audit needs a convex-family network");
  const bool timed = net.family() == Family::PartialConvexNet;
  const int off = timed ? 1 : 0;
  const int n = static_cast<int>(lo.size());
  if (hi.size() != n || n + off != net.input_dim()) throw DimensionMismatch("audit box does not match the network");
  ConvexityReport report;
  report.pairs = pairs;
  for (long start = 0; start < pairs; start += kChunk) {
    const long count = std::min(kChunk, pairs - start);
    // Columns: x, y, midpoint for each pair.
    Eigen::MatrixXd pts(n + off, 3 * count);
    for (long k = 0; k < count; ++k) {
      const double t = timed ? uniform(rng, t_lo, t_hi) : 0.0;
      for (int i = 0; i < n; ++i) {
        const double x = uniform(rng, lo(i), hi(i));
        const double y = uniform(rng, lo(i), hi(i));
        pts(off + i, 3 * k) = x;
        pts(off + i, 3 * k + 1) = y;
        pts(off + i, 3 * k + 2) = 0.5 * (x + y);
      }
      if (timed) pts.block(0, 3 * k, 1, 3).setConstant(t);
    }
    const Eigen::VectorXd v = forward_batch(net, params, pts);
    for (long k = 0; k < count; ++k) {
      const double gap = v(3 * k + 2) - 0.5 * (v(3 * k) + v(3 * k + 1));
      if (gap > kConvexityTolerance) ++report.violations;
      if (gap > report.max_violation || report.worst_x.size() == 0) {
        report.max_violation = std::max(report.max_violation, gap);
        report.worst_x = pts.col(3 * k).tail(n);
        report.worst_y = pts.col(3 * k + 1).tail(n);
        report.worst_t = timed ? pts(0, 3 * k) : 0.0;
      }
    }
  }
  return report;
}

ConvexityReport convexity_audit(const ValueNetwork& net, const ParamVector& params, const HJBProblem& problem,
                                long pairs, std::mt19937_64& rng) {
  const double T = problem.finite_horizon() ? problem.horizon() : 0.0;
  return convexity_audit(net, params, problem.box_lo(), problem.box_hi(), pairs, rng, 0.0, T);
}

MinorReport minor_audit(const ValueNetwork& net, const ParamVector& params, const HJBProblem& problem, long points,
                        std::mt19937_64& rng) {
  if (net.input_dim() != problem.input_dim()) throw DimensionMismatch("network does not match the problem");
  if (!net.supports_hessian()) throw UnsupportedCapability("minor audit needs a twice differentiable network");
  const int off = problem.state_offset();
  const int n = problem.state_dim();
  const int dim = problem.input_dim();
  const double T = problem.finite_horizon() ? problem.horizon() : 0.0;
  MinorReport report;
  report.points = points;
  report.worst_minor = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd h(n, n);
  for (long start = 0; start < points; start += kChunk) {
    const long count = std::min(kChunk, points - start);
    Eigen::MatrixXd pts(dim, count);
    for (long k = 0; k < count; ++k) {
      if (off) pts(0, k) = uniform(rng, 0.0, T);
      for (int i = 0; i < n; ++i) pts(off + i, k) = uniform(rng, problem.box_lo()(i), problem.box_hi()(i));
    }
    const Tape<double> tape = net.evaluate(params, pts, 2);
    const JetBatch<double>& out = tape.nodes.back();
    for (long k = 0; k < count; ++k) {
      for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) h(a, b) = h(b, a) = out.hess[packed_index(off + a, off + b, dim)](0, k);
      }
      const double lowest = principal_minors(h).minCoeff();
      if (lowest >= -kMinorTolerance) ++report.passing;
      if (lowest < report.worst_minor) {
        report.worst_minor = lowest;
        report.worst_point = pts.col(k);
      }
    }
  }
  report.fraction = points > 0 ? static_cast<double>(report.passing) / static_cast<double>(points) : 1.0;
  return report;
}

}  // namespace vhjb
