#include "vhjb/hjb/builtin.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace vhjb {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::MatrixXd mat1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

Eigen::MatrixXd mat2(double a00, double a01, double a10, double a11) {
  Eigen::MatrixXd m(2, 2);
  m << a00, a01, a10, a11;
  return m;
}

Eigen::MatrixXd col2(double b0, double b1) {
  Eigen::MatrixXd m(2, 1);
  m << b0, b1;
  return m;
}

struct Dynamics {
  int n = 0;
  int m = 0;
  MatrixField drift;
  MatrixField input;
};

Dynamics catalog_dynamics(const std::string& id, double a, double b) {
  if (id == "motivation") {
    return {1, 1, [a](const VectorXd&) { return mat1(a); }, [b](const VectorXd&) { return mat1(b); }};
  }
  if (id == "ex1") {
    return {2, 1,
            [](const VectorXd& x) { return mat2(-1.0, 1.0, -0.5, -0.5 + 0.5 * x(0) * x(0)); },
            [](const VectorXd& x) { return col2(0.0, x(0)); }};
  }
  if (id == "ex2") {
    return {2, 1,
            [](const VectorXd& x) {
              const double c = std::cos(2.0 * x(0)) + 2.0;
              return mat2(-1.0, 1.0, -0.5, -0.5 * (1.0 - c * c));
            },
            [](const VectorXd& x) { return col2(0.0, std::cos(2.0 * x(0)) + 2.0); }};
  }
  if (id == "ex3") {
    return {2, 1,
            [](const VectorXd& x) {
              const double x1 = x(0);
              const double g = std::numbers::pi / 2.0 + std::atan(5.0 * x1);
              // -x1 g - 5 x1^2 / (2 + 50 x1^2) written as a row acting on x1.
              return mat2(0.0, 1.0, -g - 5.0 * x1 / (2.0 + 50.0 * x1 * x1), 4.0);
            },
            [](const VectorXd&) { return col2(0.0, 3.0); }};
  }
  if (id == "ex4") {
    return {1, 1, [](const VectorXd&) { return mat1(1.0); }, [](const VectorXd&) { return mat1(1.0); }};
  }
  throw std::invalid_argument("unknown dynamics '" + id + "'");
}

HJBProblem::Definition base_definition(const std::string& name, const Dynamics& dyn, double box) {
  HJBProblem::Definition def;
  def.name = name;
  def.state_dim = dyn.n;
  def.control_dim = dyn.m;
  def.drift_matrix = dyn.drift;
  def.input_map = dyn.input;
  def.Q = MatrixXd::Identity(dyn.n, dyn.n);
  def.R = MatrixXd::Identity(dyn.m, dyn.m);
  def.box_lo = VectorXd::Constant(dyn.n, -box);
  def.box_hi = VectorXd::Constant(dyn.n, box);
  return def;
}

MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(what + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw std::invalid_argument(what + " has ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

HJBProblem custom_problem(const nlohmann::json& c) {
  const int n = c.at("n").get<int>();
  const int m = c.at("m").get<int>();
  const std::string dyn_id = c.at("dynamics").get<std::string>();
  Dynamics dyn;
  if (dyn_id == "linear") {
    const MatrixXd A = matrix_from_json(c.at("A"), "A");
    const MatrixXd B = matrix_from_json(c.at("B"), "B");
    if (A.rows() != n || A.cols() != n || B.rows() != n || B.cols() != m) {
      throw std::invalid_argument("linear dynamics matrices do not match n and m");
    }
    dyn = {n, m, [A](const VectorXd&) { return A; }, [B](const VectorXd&) { return B; }};
  } else {
    dyn = catalog_dynamics(dyn_id, c.value("a", 1.0), c.value("b", 1.0));
    if (dyn.n != n || dyn.m != m) throw std::invalid_argument("dynamics '" + dyn_id + "' has other dimensions");
  }
  HJBProblem::Definition def = base_definition(c.value("name", std::string("custom")), dyn, 1.0);
  if (c.contains("Q")) def.Q = matrix_from_json(c.at("Q"), "Q");
  if (c.contains("R")) def.R = matrix_from_json(c.at("R"), "R");
  def.allow_semidefinite_q = c.value("allow_semidefinite_q", false);
  if (c.contains("box")) {
    const auto& box = c.at("box");
    if (!box.is_array() || static_cast<int>(box.size()) != n) throw std::invalid_argument("box needs one [lo, hi] per state");
    for (int i = 0; i < n; ++i) {
      def.box_lo(i) = box[i].at(0).get<double>();
      def.box_hi(i) = box[i].at(1).get<double>();
    }
  }
  const auto& horizon = c.at("horizon");
  const std::string kind = horizon.is_string() ? horizon.get<std::string>() : horizon.at("type").get<std::string>();
  if (kind == "finite") {
    FiniteHorizon fh;
    fh.T = horizon.at("T").get<double>();
    MatrixXd P = MatrixXd::Identity(n, n);
    if (horizon.contains("terminal")) {
      const auto& term = horizon.at("terminal");
      const std::string type = term.at("type").get<std::string>();
      if (type == "zero") {
        P.setZero();
      } else if (type == "quadratic") {
        if (term.contains("P")) P = matrix_from_json(term.at("P"), "P");
      } else {
        throw std::invalid_argument("unknown terminal cost '" + type + "'");
      }
    }
    if (P.rows() != n || P.cols() != n) throw std::invalid_argument("terminal P has wrong shape");
    fh.terminal_cost = [P](const VectorXd& x) { return x.dot(P * x); };
    def.horizon = fh;
  } else if (kind != "infinite") {
    throw std::invalid_argument("horizon must be 'infinite' or 'finite'");
  }
  return HJBProblem(std::move(def));
}

}  // namespace

std::vector<std::string> builtin_problem_ids() { return {"motivation", "ex1", "ex2", "ex3", "ex4"}; }

std::vector<std::string> dynamics_catalog() { return {"linear", "motivation", "ex1", "ex2", "ex3", "ex4"}; }

HJBProblem builtin_problem(std::string_view id_view, const BuiltinOptions& options) {
  const std::string id(id_view);
  if (id == "motivation") {
    if (options.b == 0.0) throw std::invalid_argument("motivation problem needs b != 0");
    return HJBProblem(base_definition(id, catalog_dynamics(id, options.a, options.b), 1.0));
  }
  if (id == "ex1" || id == "ex2") return HJBProblem(base_definition(id, catalog_dynamics(id, 0, 0), 1.0));
  if (id == "ex3") {
    auto def = base_definition(id, catalog_dynamics(id, 0, 0), 1.0);
    def.Q = mat2(0.0, 0.0, 0.0, 1.0);
    def.allow_semidefinite_q = true;
    return HJBProblem(std::move(def));
  }
  if (id == "ex4") {
    auto def = base_definition(id, catalog_dynamics(id, 0, 0), 1.0);
    def.Q = mat1(0.0);
    def.allow_semidefinite_q = true;
    def.horizon = FiniteHorizon{options.T, [](const VectorXd& x) { return x(0) * x(0); }};
    return HJBProblem(std::move(def));
  }
  throw std::invalid_argument("unknown builtin problem '" + id + "'");
}

std::optional<BuiltinRef> builtin_reference(const nlohmann::json& doc) {
  if (doc.is_string()) return BuiltinRef{doc.get<std::string>(), {}};
  if (!doc.is_object()) return std::nullopt;
  if (doc.contains("problem")) return builtin_reference(doc.at("problem"));
  if (doc.contains("id")) {
    BuiltinRef ref{doc.at("id").get<std::string>(), {}};
    ref.options.a = doc.value("a", ref.options.a);
    ref.options.b = doc.value("b", ref.options.b);
    ref.options.T = doc.value("T", ref.options.T);
    return ref;
  }
  return std::nullopt;
}

HJBProblem problem_from_json(const nlohmann::json& doc) {
  if (doc.is_object() && doc.contains("problem")) return problem_from_json(doc.at("problem"));
  if (doc.is_object() && doc.contains("custom")) return custom_problem(doc.at("custom"));
  if (const auto ref = builtin_reference(doc)) return builtin_problem(ref->id, ref->options);
  throw std::invalid_argument("problem document needs 'id' or 'custom'");
}

nlohmann::json read_problem_document(const std::string& id_or_path) {
  for (const auto& id : builtin_problem_ids()) {
    if (id == id_or_path) return id;
  }
  std::ifstream in(id_or_path);
  if (!in) throw std::invalid_argument("'" + id_or_path + "' is neither a builtin problem nor a readable file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("problem file " + id_or_path + " is not valid JSON: " + e.what());
  }
}

HJBProblem load_problem(const std::string& id_or_path) {
  const nlohmann::json doc = read_problem_document(id_or_path);
  try {
    return problem_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed problem document: " + std::string(e.what()));
  }
}

}  // namespace vhjb
