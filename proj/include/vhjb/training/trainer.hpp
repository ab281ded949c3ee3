#pragma once

#include "vhjb/autodiff/param_vector.hpp"
#include "vhjb/hjb/problem.hpp"
#include "vhjb/training/adam.hpp"
#include "vhjb/training/losses.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace vhjb {

class ValueNetwork;

enum class Method { Penalty, Convex };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct TrainConfig {
  Method method = Method::Convex;
  AdamConfig adam;
  long epoch_cap = 20000;  // per stage and per lambda phase
  int n_inner = 1024;
  int n_boundary = 128;
  int n_hessian = 256;
  double lambda = 1.0;          // boundary weight for plain training
  double lambda_large = 100.0;  // first phase of each strip
  double loss_th1 = 1e-2;        // first (large-lambda) phase of each strip
  double loss_th2 = 1e-4;
  double boundary_tol = 5e-3;   // strip stage 1 exit: max |V(T, x) - psi(x)| on the x-grid
  double nonneg_weight = 0.0;   // optional max(0, -V)^2 penalty for infinite horizons
  double init_output_gain = 1.0;  // multiplies the output-layer weights of a fresh initialization
  std::uint64_t seed = 0;
  /// Optional sink for one-line progress notes (stage and strip completion).
  std::function<void(const std::string&)> progress;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

/// Backward-in-time strip curriculum: [t_ini, T] first, then [t_strip, T] with
/// t_strip stepping down by dt and clamped at 0.
class StripSchedule {
 public:
  StripSchedule(double horizon, double t_ini, double dt);
  /// Defaults: dt = T / 20, t_ini = T - dt.
  static StripSchedule defaults(double horizon);

  double horizon() const { return horizon_; }
  double t_ini() const { return t_ini_; }
  double dt() const { return dt_; }
  double t_strip() const { return t_strip_; }
  double t_stripold() const { return t_stripold_; }
  bool done() const { return t_strip_ <= 0.0; }
  /// Number of strips below t_ini: ceil(t_ini / dt).
  int strip_count() const;
  /// t_stripold <- t_strip, t_strip <- max(0, t_strip - dt).
  void advance();
  /// Restarts at t_stripold = t_ini.
  void reset();

 private:
  double horizon_;
  double t_ini_;
  double dt_;
  double t_strip_ = 0.0;
  double t_stripold_ = 0.0;
};

enum class Stage { Plain = 0, Boundary = 1, InitialStrip = 2, Strip = 3 };

struct HistoryRow {
  Stage stage = Stage::Plain;
  int strip_index = -1;
  long epoch = 0;
  double loss_total = 0.0;
  double loss_residual = 0.0;
  double loss_boundary = 0.0;
  double loss_penalty = 0.0;
  double lambda = 1.0;
};

struct StripRecord {
  int index = 0;  // 0 is the initial strip [t_ini, T]
  double t_lo = 0.0;
  double t_old = 0.0;
  bool converged = false;
  long large_lambda_epochs = 0;
  long unit_lambda_epochs = 0;
};

struct History {
  std::vector<HistoryRow> rows;
  std::vector<StripRecord> strips;
  double stage1_boundary_error = 0.0;
};

enum class TrainStatus { Converged, NotConverged };

struct TrainResult {
  ParamVector params;
  History history;
  TrainStatus status = TrainStatus::NotConverged;
  std::string message;
  bool converged() const { return status == TrainStatus::Converged; }
};

/// Checks the method/network pairing; throws std::invalid_argument naming the problem.
void check_pairing(Method method, const ValueNetwork& net);

/// Draws a fresh collocation batch over the full problem box.
SampleBatch sample_batch(const HJBProblem& problem, const TrainConfig& config, std::mt19937_64& rng);

/// Plain training: resample, loss, gradient, Adam step until loss <= loss_th2 or the
/// epoch cap. `initial` overrides the seeded initialization.
TrainResult train(const HJBProblem& problem, const ValueNetwork& net, const TrainConfig& config,
                  std::optional<ParamVector> initial = std::nullopt);

/// Strip training for finite-horizon problems with a partially convex network.
TrainResult strip_train(const HJBProblem& problem, const ValueNetwork& net, const TrainConfig& config,
                        StripSchedule schedule, std::optional<ParamVector> initial = std::nullopt);

/// CSV: stage,strip_index,epoch,loss_total,loss_residual,loss_boundary,loss_penalty,lambda.
void write_history_csv(std::ostream& out, const History& history);

}  // namespace vhjb
