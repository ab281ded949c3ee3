#include "vhjb/cli/run_config.hpp"

#include "vhjb/hjb/builtin.hpp"

#include <fstream>
#include <set>

namespace vhjb {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!known.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

TrainConfig parse_train(const json& t, TrainConfig c) {
  if (!t.is_object()) throw ConfigError("'train' must be an object");
  reject_unknown(t,
                 {"adam_step", "adam_beta1", "adam_beta2", "adam_eps", "epoch_cap", "n_inner", "n_boundary", "n_hessian",
                  "lambda", "lambda_large", "loss_th1", "loss_th2", "boundary_tol", "nonneg_weight",
                  "init_output_gain"},
                 "train");
  read(t, "adam_step", c.adam.step);
  read(t, "adam_beta1", c.adam.beta1);
  read(t, "adam_beta2", c.adam.beta2);
  read(t, "adam_eps", c.adam.eps);
  read(t, "epoch_cap", c.epoch_cap);
  read(t, "n_inner", c.n_inner);
  read(t, "n_boundary", c.n_boundary);
  read(t, "n_hessian", c.n_hessian);
  read(t, "lambda", c.lambda);
  read(t, "lambda_large", c.lambda_large);
  read(t, "loss_th1", c.loss_th1);
  read(t, "loss_th2", c.loss_th2);
  read(t, "boundary_tol", c.boundary_tol);
  read(t, "nonneg_weight", c.nonneg_weight);
  read(t, "init_output_gain", c.init_output_gain);
  return c;
}

NetworkSpec parse_network(const json& n) {
  if (!n.is_object()) throw ConfigError("'network' must be an object");
  reject_unknown(n, {"family", "widths", "activation", "beta"}, "network");
  NetworkSpec spec;
  spec.family = family_from_string(n.at("family").get<std::string>());
  spec.widths = n.at("widths").get<std::vector<int>>();
  spec.activation = n.contains("activation") ? activation_from_string(n.at("activation").get<std::string>())
                    : spec.family == Family::SmoothMLP ? Activation::Tanh
                                                       : Activation::Relu;
  read(n, "beta", spec.beta);
  return spec;
}

json resolve_problem(const json& p, const std::filesystem::path& base_dir) {
  if (!p.is_string()) return p;
  const std::string s = p.get<std::string>();
  for (const auto& id : builtin_problem_ids()) {
    if (id == s) return p;
  }
  std::filesystem::path path(s);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  if (!std::filesystem::exists(path)) throw ConfigError("problem '" + s + "' is neither a builtin id nor a file");
  json doc = read_problem_document(path.string());
  return doc.is_object() && doc.contains("problem") ? doc.at("problem") : doc;
}

}  // namespace

NetworkSpec default_network(Method method, const HJBProblem& problem) {
  if (method == Method::Penalty) return smooth_mlp_spec(problem.input_dim(), {32, 32});
  if (problem.finite_horizon()) return partial_convex_net_spec(problem.state_dim(), 32, Activation::Softplus);
  return convex_net_spec(problem.state_dim(), 32, Activation::Softplus);
}

TrainConfig default_train_config(Method method, const HJBProblem& problem) {
  TrainConfig c;
  if (method == Method::Convex && !problem.finite_horizon()) c.init_output_gain = 5.0;
  return c;
}

HJBProblem RunConfig::problem() const { return problem_from_json(problem_doc); }

StripSchedule RunConfig::schedule(double horizon) const {
  const double dt = strip_settings.dt.value_or(horizon / 20.0);
  return StripSchedule(horizon, strip_settings.t_ini.value_or(horizon - dt), dt);
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  try {
    if (!doc.is_object()) throw ConfigError("run config must be a JSON object");
    reject_unknown(doc, {"problem", "method", "network", "train", "strips", "out", "seed"}, "run config");
    RunConfig cfg;
    if (!doc.contains("problem")) throw ConfigError("run config needs a 'problem'");
    cfg.problem_doc = resolve_problem(doc.at("problem"), base_dir);
    const HJBProblem problem = cfg.problem();
    cfg.method = method_from_string(doc.value("method", std::string("convex")));
    cfg.network = doc.contains("network") ? parse_network(doc.at("network")) : default_network(cfg.method, problem);
    cfg.train = default_train_config(cfg.method, problem);
    if (doc.contains("train")) cfg.train = parse_train(doc.at("train"), cfg.train);
    cfg.train.method = cfg.method;
    read(doc, "seed", cfg.seed);
    cfg.train.seed = cfg.seed;
    cfg.train.validate();

    const ValueNetwork net(cfg.network);
    check_pairing(cfg.method, net);
    if (net.input_dim() != problem.input_dim()) {
      throw ConfigError("network takes " + std::to_string(net.input_dim()) + " inputs but problem '" + problem.name() +
                        "' has " + std::to_string(problem.input_dim()));
    }

    cfg.strips = problem.finite_horizon() && cfg.method == Method::Convex;
    if (doc.contains("strips")) {
      const json& s = doc.at("strips");
      if (s.is_boolean()) {
        cfg.strips = s.get<bool>();
      } else {
        reject_unknown(s, {"t_ini", "dt"}, "strips");
        cfg.strips = true;
        if (s.contains("t_ini")) cfg.strip_settings.t_ini = s.at("t_ini").get<double>();
        if (s.contains("dt")) cfg.strip_settings.dt = s.at("dt").get<double>();
      }
    }
    if (cfg.strips) {
      if (!problem.finite_horizon()) throw ConfigError("strip training needs a finite-horizon problem");
      if (cfg.method != Method::Convex) throw ConfigError("strip training uses the convex method");
      if (net.family() != Family::PartialConvexNet) throw ConfigError("strip training needs a partial_convex_net");
      cfg.schedule(problem.horizon());
    }

    std::filesystem::path out(doc.value("out", std::string("run")));
    if (out.is_relative() && !base_dir.empty()) out = base_dir / out;
    cfg.out_dir = out;
    return cfg;
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

json RunConfig::to_json() const {
  const TrainConfig& t = train;
  json j;
  j["problem"] = problem_doc;
  j["method"] = to_string(method);
  j["network"] = {{"family", to_string(network.family)},
                  {"widths", network.widths},
                  {"activation", to_string(network.activation)},
                  {"beta", network.beta}};
  j["train"] = {{"adam_step", t.adam.step},   {"adam_beta1", t.adam.beta1},     {"adam_beta2", t.adam.beta2},
                {"adam_eps", t.adam.eps},     {"epoch_cap", t.epoch_cap},       {"n_inner", t.n_inner},
                {"n_boundary", t.n_boundary}, {"n_hessian", t.n_hessian},       {"lambda", t.lambda},
                {"lambda_large", t.lambda_large}, {"loss_th1", t.loss_th1},     {"loss_th2", t.loss_th2},
                {"boundary_tol", t.boundary_tol}, {"nonneg_weight", t.nonneg_weight},
                {"init_output_gain", t.init_output_gain}};
  if (strips) {
    const StripSchedule s = schedule(problem().horizon());
    j["strips"] = {{"t_ini", s.t_ini()}, {"dt", s.dt()}};
  } else {
    j["strips"] = false;
  }
  j["out"] = out_dir.string();
  j["seed"] = seed;
  return j;
}

}  // namespace vhjb
