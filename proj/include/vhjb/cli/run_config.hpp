#pragma once

#include "vhjb/hjb/problem.hpp"
#include "vhjb/networks/network.hpp"
#include "vhjb/training/trainer.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace vhjb {

/// Any problem with a run configuration; reported with exit status 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct StripSettings {
  std::optional<double> t_ini;
  std::optional<double> dt;
};

/// A parsed `train` configuration. Relative paths are resolved against the
/// directory of the config file.
struct RunConfig {
  nlohmann::json problem_doc;  // resolved problem document (string id or object)
  Method method = Method::Convex;
  NetworkSpec network;
  TrainConfig train;
  bool strips = false;  // strip training; the default for finite-horizon convex runs
  StripSettings strip_settings;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;

  HJBProblem problem() const;
  StripSchedule schedule(double horizon) const;
  /// Effective settings after defaults, as written to the run manifest.
  nlohmann::json to_json() const;
};

/// Parses and validates a config document; the method/network pairing and the
/// network/problem dimensions are checked here. Throws ConfigError.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Network used when a config names none: tanh MLP [in, 32, 32, 1] for the penalty
/// method, softplus convex_net(32) for infinite horizons, softplus partial_convex_net(32)
/// for finite horizons.
NetworkSpec default_network(Method method, const HJBProblem& problem);

/// Training defaults for a config; they differ from TrainConfig{} only in
/// init_output_gain = 5 for convex-method runs on infinite horizons.
TrainConfig default_train_config(Method method, const HJBProblem& problem);

}  // namespace vhjb
