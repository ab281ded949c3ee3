#pragma once

#include "vhjb/hjb/problem.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vhjb {

/// Parameters of the builtin problems that are not fixed by their definition.
struct BuiltinOptions {
  double a = 1.0;   // motivation: x' = a x + b u
  double b = 1.0;
  double T = 10.0;  // ex4 horizon
};

/// Benchmark problems:
///   motivation  scalar x' = a x + b u, cost x^2 + u^2, infinite horizon on [-1, 1]
///   ex1, ex2    two-state nonlinear systems, cost |x|^2 + u^2, infinite horizon on [-1, 1]^2
///   ex3         cost x2^2 + u^2 (semidefinite Q), infinite horizon on [-1, 1]^2
///   ex4         x' = x + u, cost u^2 with terminal x(T)^2, finite horizon on [-1, 1]
/// Throws std::invalid_argument for an unknown id.
HJBProblem builtin_problem(std::string_view id, const BuiltinOptions& options = {});

std::vector<std::string> builtin_problem_ids();

/// A builtin problem id plus its options.
struct BuiltinRef {
  std::string id;
  BuiltinOptions options;
};

/// The builtin problem a document names (a bare id string, {"id", ...}, or a
/// document whose "problem" member is one of these); nullopt for custom problems.
std::optional<BuiltinRef> builtin_reference(const nlohmann::json& doc);

/// Problem definition document: {"id": "...", "a":..., "b":..., "T":...} or
/// {"custom": {"n", "m", "Q", "R", "horizon", "box", "dynamics", ...}}.
HJBProblem problem_from_json(const nlohmann::json& doc);

/// Accepts a builtin id, or a path to a JSON file holding a problem document
/// (or any document with a "problem" member, such as a run config or manifest).
HJBProblem load_problem(const std::string& id_or_path);

/// The document load_problem would parse: a JSON string for builtin ids, else the file contents.
nlohmann::json read_problem_document(const std::string& id_or_path);

/// Catalog names usable as custom "dynamics".
std::vector<std::string> dynamics_catalog();

}  // namespace vhjb
