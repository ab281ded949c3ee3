#include "vhjb/training/trainer.hpp"

#include "vhjb/networks/network.hpp"
#include "vhjb/oracle/residual_check.hpp"
#include "vhjb/util/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace vhjb {

std::string to_string(Method method) { return method == Method::Penalty ? "penalty" : "convex"; }

Method method_from_string(const std::string& name) {
  if (name == "penalty") return Method::Penalty;
  if (name == "convex") return Method::Convex;
  throw std::invalid_argument("unknown method '" + name + "' (expected penalty or convex)");
}

void TrainConfig::validate() const {
  if (!(adam.step > 0.0)) throw std::invalid_argument("adam step size must be positive");
  if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0)) throw std::invalid_argument("adam beta1 must lie in (0, 1)");
  if (!(adam.beta2 > 0.0 && adam.beta2 < 1.0)) throw std::invalid_argument("adam beta2 must lie in (0, 1)");
  if (!(adam.eps > 0.0)) throw std::invalid_argument("adam epsilon must be positive");
  if (epoch_cap < 0) throw std::invalid_argument("epoch cap must be non-negative");
  if (n_inner < 0 || n_boundary < 0 || n_hessian < 0) throw std::invalid_argument("batch sizes must be non-negative");
  if (!(lambda >= 1.0) || !(lambda_large >= 1.0)) throw std::invalid_argument("lambda must be >= 1");
  if (!(loss_th2 <= loss_th1)) throw std::invalid_argument("loss_th2 must not exceed loss_th1");
  if (!(loss_th2 > 0.0)) throw std::invalid_argument("loss thresholds must be positive");
  if (!(boundary_tol > 0.0)) throw std::invalid_argument("boundary tolerance must be positive");
  if (nonneg_weight < 0.0) throw std::invalid_argument("nonnegativity weight must be non-negative");
  if (!(init_output_gain > 0.0)) throw std::invalid_argument("init_output_gain must be positive");
}

StripSchedule::StripSchedule(double horizon, double t_ini, double dt) : horizon_(horizon), t_ini_(t_ini), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("strip width must be positive");
  if (!(t_ini > 0.0 && t_ini < horizon)) throw std::invalid_argument("t_ini must lie in (0, T)");
  reset();
}

StripSchedule StripSchedule::defaults(double horizon) {
  const double dt = horizon / 20.0;
  return StripSchedule(horizon, horizon - dt, dt);
}

int StripSchedule::strip_count() const { return static_cast<int>(std::ceil(t_ini_ / dt_ - 1e-9)); }

void StripSchedule::reset() {
  t_stripold_ = t_ini_;
  t_strip_ = t_ini_ - dt_;
  if (t_strip_ < dt_ * 1e-9) t_strip_ = 0.0;
}

void StripSchedule::advance() {
  if (done()) throw std::logic_error("strip schedule already reached t = 0");
  t_stripold_ = t_strip_;
  t_strip_ = t_stripold_ - dt_;
  if (t_strip_ < dt_ * 1e-9) t_strip_ = 0.0;
}

void check_pairing(Method method, const ValueNetwork& net) {
  if (method == Method::Penalty && !net.supports_hessian()) {
    throw std::invalid_argument("method 'penalty' needs input-Hessians, but " + to_string(net.family()) + " with " +
                                to_string(net.spec().activation) + " activation is not twice differentiable");
  }
  if (method == Method::Convex && !net.convex_family()) {
    throw std::invalid_argument("method 'convex' needs a convex_net or partial_convex_net, got " +
                                to_string(net.family()));
  }
}

namespace {

// Uniform samples over [t_lo, t_hi] x box (the time row only for finite horizons).
Eigen::MatrixXd sample_region(const HJBProblem& problem, int count, double t_lo, double t_hi, std::mt19937_64& rng) {
  const int dim = problem.input_dim();
  const int off = problem.state_offset();
  Eigen::MatrixXd pts(dim, count);
  for (int j = 0; j < count; ++j) {
    if (off == 1) pts(0, j) = uniform(rng, t_lo, t_hi);
    for (int i = 0; i < problem.state_dim(); ++i) {
      pts(off + i, j) = uniform(rng, problem.box_lo()(i), problem.box_hi()(i));
    }
  }
  return pts;
}

// Terminal-time points with psi targets.
void sample_terminal(const HJBProblem& problem, int count, std::mt19937_64& rng, Eigen::MatrixXd& pts,
                     Eigen::VectorXd& values) {
  const double T = problem.horizon();
  pts = sample_region(problem, count, T, T, rng);
  pts.row(0).setConstant(T);
  values.resize(count);
  for (int j = 0; j < count; ++j) values(j) = problem.terminal_cost(problem.state_of(pts.col(j)));
}

LossPart nonneg_part(double weight) {
  LossPart part;
  part.category = LossCategory::Boundary;
  part.order = 0;
  part.term = [weight](const Eigen::MatrixXd&, const JetBatch<double>& out, JetBatch<double>* adjoint) {
    const Eigen::Index n = out.points();
    const double scale = weight / static_cast<double>(n);
    const Eigen::ArrayXd neg = (-out.val.row(0).transpose().array()).max(0.0);
    if (adjoint) adjoint->val.row(0).array() -= 2.0 * scale * neg.transpose();
    return scale * neg.square().sum();
  };
  return part;
}

HistoryRow make_row(Stage stage, int strip, long epoch, const LossComponents& c, double lambda) {
  return {stage, strip, epoch, c.total(), c.residual(), c.boundary(), c.penalty(), lambda};
}

class Optimizer {
 public:
  Optimizer(const ValueNetwork& net, const TrainConfig& config, ParamVector& params)
      : net_(net), config_(config), params_(params), state_(AdamState::zeros(params.size())) {}

  // Evaluates the loss and its gradient, logs a history row, and steps unless the
  // loss already meets `threshold`. Returns true when the threshold is met.
  bool iterate(const std::vector<LossPart>& parts, double threshold, History& history, Stage stage, int strip,
               double lambda) {
    const CompositeLossGrad g = loss_param_grad(net_, params_, parts);
    history.rows.push_back(make_row(stage, strip, epoch_++, g.components, lambda));
    if (g.value.loss <= threshold) return true;
    adam_step(net_, state_, params_, g.value.grad, config_.adam);
    return false;
  }

  long epoch() const { return epoch_; }

 private:
  const ValueNetwork& net_;
  const TrainConfig& config_;
  ParamVector& params_;
  AdamState state_;
  long epoch_ = 0;
};

// Slope range of the first time-feature layer at initialization.
constexpr double kTimeFeatureSlope = 2.0;

ParamVector initial_params(const ValueNetwork& net, const HJBProblem& problem, const TrainConfig& config,
                           std::optional<ParamVector> initial) {
  if (initial) {
    net.check_params(*initial);
    return std::move(*initial);
  }
  auto rng = SeedStreams(config.seed).stream("init");
  ParamVector params = net.init_params(rng);
  params.matrix(net.output_block()) *= config.init_output_gain;
  if (net.family() == Family::PartialConvexNet && problem.finite_horizon()) {
    // tanh(A t + a) with zero bias is flat over most of a long horizon; centre each
    // feature at a random time in [0, T] instead.
    auto slope = params.matrix("F1.A");
    auto offset = params.matrix("F1.a");
    for (Eigen::Index i = 0; i < slope.size(); ++i) {
      slope(i) = uniform(rng, -kTimeFeatureSlope, kTimeFeatureSlope);
      offset(i) = -slope(i) * uniform(rng, 0.0, problem.horizon());
    }
  }
  return params;
}

}  // namespace

SampleBatch sample_batch(const HJBProblem& problem, const TrainConfig& config, std::mt19937_64& rng) {
  SampleBatch batch;
  const double T = problem.finite_horizon() ? problem.horizon() : 0.0;
  batch.inner = sample_region(problem, config.n_inner, 0.0, T, rng);
  if (config.method == Method::Penalty) batch.hessian = sample_region(problem, config.n_hessian, 0.0, T, rng);
  if (problem.finite_horizon()) {
    sample_terminal(problem, config.n_boundary, rng, batch.boundary, batch.boundary_values);
  } else {
    // The single anchor V(0) = 0.
    batch.boundary = Eigen::MatrixXd::Zero(problem.input_dim(), 1);
    batch.boundary_values = Eigen::VectorXd::Zero(1);
  }
  return batch;
}

TrainResult train(const HJBProblem& problem, const ValueNetwork& net, const TrainConfig& config,
                  std::optional<ParamVector> initial) {
  config.validate();
  check_pairing(config.method, net);
  if (net.input_dim() != problem.input_dim()) {
    throw DimensionMismatch("network input dimension " + std::to_string(net.input_dim()) + " does not match problem " +
                            std::to_string(problem.input_dim()));
  }
  if (!problem.finite_horizon() && !problem.contains(Eigen::VectorXd::Zero(problem.input_dim()))) {
    throw std::invalid_argument("the anchor x = 0 lies outside the state box");
  }
  TrainResult result;
  result.params = initial_params(net, problem, config, std::move(initial));
  if (net.convex_family()) project_positive_inplace(net, result.params);
  auto rng = SeedStreams(config.seed).stream("sampling");
  Optimizer opt(net, config, result.params);
  for (long epoch = 0; epoch < config.epoch_cap; ++epoch) {
    const SampleBatch batch = sample_batch(problem, config, rng);
    std::vector<LossPart> parts = config.method == Method::Penalty ? method1_parts(problem, batch)
                                                                    : method2_parts(problem, batch, config.lambda);
    if (config.nonneg_weight > 0.0 && !problem.finite_horizon()) {
      LossPart nn = nonneg_part(config.nonneg_weight);
      nn.inputs = batch.inner;
      parts.push_back(std::move(nn));
    }
    const double lambda = config.method == Method::Penalty ? 1.0 : config.lambda;
    if (opt.iterate(parts, config.loss_th2, result.history, Stage::Plain, -1, lambda)) {
      result.status = TrainStatus::Converged;
      result.message = "converged after " + std::to_string(epoch) + " epochs";
      return result;
    }
  }
  result.status = TrainStatus::NotConverged;
  result.message = "epoch cap " + std::to_string(config.epoch_cap) + " reached with loss above " +
                   std::to_string(config.loss_th2);
  return result;
}

TrainResult strip_train(const HJBProblem& problem, const ValueNetwork& net, const TrainConfig& config,
                        StripSchedule schedule, std::optional<ParamVector> initial) {
  config.validate();
  if (!problem.finite_horizon()) throw std::invalid_argument("strip training needs a finite-horizon problem");
  if (config.method != Method::Convex) throw std::invalid_argument("strip training uses the convex method");
  check_pairing(config.method, net);
  if (net.input_dim() != problem.input_dim()) throw DimensionMismatch("network input does not match (t, x)");
  const double T = problem.horizon();
  if (std::abs(schedule.horizon() - T) > 1e-12 * std::max(1.0, T)) {
    throw std::invalid_argument("strip schedule horizon differs from the problem horizon");
  }

  TrainResult result;
  result.params = initial_params(net, problem, config, std::move(initial));
  project_positive_inplace(net, result.params);
  History& hist = result.history;
  auto rng = SeedStreams(config.seed).stream("sampling");
  Optimizer opt(net, config, result.params);
  std::vector<std::string> failures;

  // Stage 1: every (t, x) in the box is pulled towards psi(x).
  const int n = problem.state_dim();
  std::vector<int> counts(problem.input_dim(), n == 1 ? 101 : 21);
  counts[0] = 1;
  Eigen::VectorXd lo(problem.input_dim()), hi(problem.input_dim());
  lo << T, problem.box_lo();
  hi << T, problem.box_hi();
  const Eigen::MatrixXd terminal_grid = tensor_grid(lo, hi, counts);
  Eigen::VectorXd terminal_values(terminal_grid.cols());
  for (Eigen::Index j = 0; j < terminal_grid.cols(); ++j) {
    terminal_values(j) = problem.terminal_cost(problem.state_of(terminal_grid.col(j)));
  }
  auto stage1_error = [&] {
    return (forward_batch(net, result.params, terminal_grid) - terminal_values).cwiseAbs().maxCoeff();
  };
  bool stage1_done = false;
  for (long e = 0; e < config.epoch_cap; ++e) {
    Eigen::MatrixXd pts = sample_region(problem, config.n_inner, 0.0, T, rng);
    Eigen::VectorXd targets(pts.cols());
    for (Eigen::Index j = 0; j < pts.cols(); ++j) targets(j) = problem.terminal_cost(problem.state_of(pts.col(j)));
    hist.stage1_boundary_error = stage1_error();
    if (hist.stage1_boundary_error <= config.boundary_tol) {
      stage1_done = true;
      break;
    }
    std::vector<LossPart> parts{boundary_part(std::move(pts), std::move(targets))};
    opt.iterate(parts, 0.0, hist, Stage::Boundary, -1, 1.0);
  }
  if (!stage1_done) {
    hist.stage1_boundary_error = stage1_error();
    stage1_done = hist.stage1_boundary_error <= config.boundary_tol;
  }
  if (!stage1_done) {
    failures.push_back("boundary stage ended with max error " + std::to_string(hist.stage1_boundary_error));
  }
  if (config.progress) {
    config.progress("boundary stage: max error " + std::to_string(hist.stage1_boundary_error) + " after " +
                    std::to_string(opt.epoch()) + " epochs");
  }

  // Stages 2 and 3 share the two-phase lambda schedule; strip 0 is [t_ini, T].
  auto run_strip = [&](int index, double t_lo, double t_old) {
    StripRecord rec;
    rec.index = index;
    rec.t_lo = t_lo;
    rec.t_old = t_old;
    const Stage stage = index == 0 ? Stage::InitialStrip : Stage::Strip;
    bool ok = true;
    std::string missed;
    for (int phase = 0; phase < 2; ++phase) {
      const double lambda = phase == 0 ? config.lambda_large : 1.0;
      const double threshold = phase == 0 ? config.loss_th1 : config.loss_th2;
      bool met = false;
      long epochs = 0;
      for (; epochs < config.epoch_cap && !met; ++epochs) {
        std::vector<LossPart> parts;
        Eigen::MatrixXd bpts;
        Eigen::VectorXd bvals;
        sample_terminal(problem, config.n_boundary, rng, bpts, bvals);
        parts.push_back(boundary_part(std::move(bpts), std::move(bvals), lambda));
        if (index == 0) {
          parts.push_back(residual_part(problem, sample_region(problem, config.n_inner, t_lo, T, rng)));
        } else {
          const int half = config.n_inner / 2;
          parts.push_back(residual_part(problem, sample_region(problem, half, t_old, T, rng), lambda));
          parts.push_back(residual_part(problem, sample_region(problem, config.n_inner - half, t_lo, t_old, rng)));
        }
        met = opt.iterate(parts, threshold, hist, stage, index, lambda);
      }
      (phase == 0 ? rec.large_lambda_epochs : rec.unit_lambda_epochs) = epochs;
      if (!met) {
        ok = false;
        missed += missed.empty() ? "" : " and ";
        missed += phase == 0 ? "loss_th1" : "loss_th2";
      }
    }
    rec.converged = ok;
    hist.strips.push_back(rec);
    if (config.progress) {
      std::ostringstream note;
      note << "strip " << index << " [" << t_lo << ", " << T << "]: " << (ok ? "converged" : "not converged") << ", "
           << rec.large_lambda_epochs << " + " << rec.unit_lambda_epochs << " epochs, loss "
           << hist.rows.back().loss_total;
      config.progress(note.str());
    }
    if (!ok) {
      std::ostringstream msg;
      msg << "strip " << index << " [" << t_lo << ", " << T << "] did not reach " << missed;
      failures.push_back(msg.str());
    }
  };

  run_strip(0, schedule.t_ini(), T);
  schedule.reset();
  for (int index = 1;; ++index) {
    run_strip(index, schedule.t_strip(), schedule.t_stripold());
    if (schedule.done()) break;
    schedule.advance();
  }

  if (failures.empty()) {
    result.status = TrainStatus::Converged;
    result.message = "converged through " + std::to_string(hist.strips.size()) + " strips";
  } else {
    result.status = TrainStatus::NotConverged;
    result.message = failures.front();
    for (std::size_t i = 1; i < failures.size(); ++i) result.message += "; " + failures[i];
  }
  return result;
}

void write_history_csv(std::ostream& out, const History& history) {
  out << "stage,strip_index,epoch,loss_total,loss_residual,loss_boundary,loss_penalty,lambda\n";
  out << std::setprecision(17);
  for (const auto& r : history.rows) {
    out << static_cast<int>(r.stage) << ',' << r.strip_index << ',' << r.epoch << ',' << r.loss_total << ','
        << r.loss_residual << ',' << r.loss_boundary << ',' << r.loss_penalty << ',' << r.lambda << '\n';
  }
}

}  // namespace vhjb
