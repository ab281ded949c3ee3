#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace vhjb {

// Exit statuses shared by the commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;  // train only
inline constexpr int kExitAuditFailed = 3;   // audit found violations

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

/// Trains from a config file; writes checkpoint.json, history.csv and manifest.json
/// into the configured output directory.
int cmd_train(const std::string& config_path, Streams io);

struct EvalOptions {
  std::string grid;   // "NXxNY..."; one count per network input; empty picks a default
  std::string range;  // "lo:hi,lo:hi,..." per input; empty uses the problem box
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  long audit_pairs = 10000;
};

/// Writes surface.csv and metrics.json.
int cmd_eval(const std::string& checkpoint, const std::string& problem, const EvalOptions& options, Streams io);

struct AuditOptions {
  long pairs = 10000;
  std::uint64_t seed = 0;
  double min_fraction = 0.99;  // smooth networks: required share of points with nonnegative minors
  std::string out_dir = ".";
};

/// Writes audit.json; exits kExitAuditFailed when the audit finds violations.
int cmd_audit(const std::string& checkpoint, const std::string& problem, const AuditOptions& options, Streams io);

struct OracleOptions {
  std::optional<double> fd_eps;
  int nx = 201;
  double t_start = 0.0;
  std::string out_dir = ".";
};

/// Without fd_eps: residual check of the analytic solution, written to oracle.json.
/// With fd_eps: vanishing-viscosity grid solve written to fd.csv (one-state finite horizon).
int cmd_oracle(const std::string& problem, const OracleOptions& options, Streams io);

}  // namespace vhjb
