#include "vhjb/cli/commands.hpp"
#include "vhjb/cli/run_config.hpp"
#include "vhjb/networks/checkpoint.hpp"

#include "../support/test_util.hpp"

#include <gtest/gtest.h>
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vhjb;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("vhjb_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  // Small, fast Hessian-penalty config on ex1.
  static json small_config(const std::string& out) {
    return {{"problem", "ex1"},
            {"method", "penalty"},
            {"network", {{"family", "smooth_mlp"}, {"widths", {2, 6, 1}}}},
            {"train", {{"epoch_cap", 25}, {"n_inner", 32}, {"n_hessian", 16}}},
            {"out", out},
            {"seed", 3}};
  }

  int train(const json& cfg, const std::string& name = "cfg.json") {
    return cmd_train(write(name, cfg.dump()).string(), io());
  }

  Streams io() { return {out_, err_}; }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, PairingErrorExitsBeforeTraining) {
  json cfg = small_config("run");
  cfg["network"] = {{"family", "convex_net"}, {"widths", {2, 8}}, {"activation", "relu"}};
  EXPECT_EQ(train(cfg), kExitError);
  EXPECT_NE(err_.str().find("penalty"), std::string::npos);
  EXPECT_NE(err_.str().find("twice differentiable"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "run"));
}

TEST_F(CliTest, ConfigErrors) {
  EXPECT_EQ(cmd_train((dir_ / "missing.json").string(), io()), kExitError);
  EXPECT_EQ(cmd_train(write("bad.json", "{not json").string(), io()), kExitError);
  json cfg = small_config("run");
  cfg["train"]["adam_stepp"] = 1e-3;
  EXPECT_EQ(train(cfg), kExitError);
  EXPECT_NE(err_.str().find("adam_stepp"), std::string::npos);
  cfg = small_config("run");
  cfg["network"]["widths"] = {3, 6, 1};
  EXPECT_EQ(train(cfg), kExitError);
  cfg = small_config("run");
  cfg["problem"] = "ex7";
  EXPECT_EQ(train(cfg), kExitError);
}

TEST_F(CliTest, ZeroEpochCapExitsNotConverged) {
  json cfg = small_config("run");
  cfg["train"]["epoch_cap"] = 0;
  EXPECT_EQ(train(cfg), kExitNotConverged);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "checkpoint.json"));
  EXPECT_TRUE(fs::exists(dir_ / "run" / "history.csv"));
  const json manifest = json::parse(slurp(dir_ / "run" / "manifest.json"));
  EXPECT_EQ(manifest["status"], "not_converged");
  EXPECT_EQ(manifest["seed"], 3);
}

TEST_F(CliTest, EvalOfExactHeadMatchesOracle) {
  const ValueNetwork net = tu::quadratic_head();
  save_checkpoint(dir_ / "head.json", net.spec(), tu::quadratic_head_params(net, Eigen::Vector2d(0.5, 1.0)));
  EvalOptions opt;
  opt.out_dir = (dir_ / "ev").string();
  ASSERT_EQ(cmd_eval((dir_ / "head.json").string(), "ex1", opt, io()), kExitOk) << err_.str();
  const json m = json::parse(slurp(dir_ / "ev" / "metrics.json"));
  EXPECT_LT(m["max_abs_err"].get<double>(), 1e-12);
  EXPECT_LT(m["max_abs_residual"].get<double>(), 1e-12);
  EXPECT_TRUE(m["convexity_violations"].is_null());
  EXPECT_EQ(m["grid"], json({51, 51}));

  std::ifstream surface(dir_ / "ev" / "surface.csv");
  std::string header;
  std::getline(surface, header);
  EXPECT_EQ(header, "x1,x2,V_nn,V_true,residual");
  long rows = 0;
  for (std::string line; std::getline(surface, line);) ++rows;
  EXPECT_EQ(rows, 51 * 51);
}

TEST_F(CliTest, EvalGridAndRangeOptions) {
  const ValueNetwork net = tu::quadratic_head();
  save_checkpoint(dir_ / "head.json", net.spec(), tu::quadratic_head_params(net, Eigen::Vector2d(0.5, 1.0)));
  EvalOptions opt;
  opt.out_dir = (dir_ / "ev").string();
  opt.grid = "5x7";
  opt.range = "-0.5:0.5,0:1";
  ASSERT_EQ(cmd_eval((dir_ / "head.json").string(), "ex1", opt, io()), kExitOk) << err_.str();
  EXPECT_EQ(json::parse(slurp(dir_ / "ev" / "metrics.json"))["grid"], json({5, 7}));

  opt.range = "-2:0,0:1";
  EXPECT_EQ(cmd_eval((dir_ / "head.json").string(), "ex1", opt, io()), kExitError);
  opt.range.clear();
  opt.grid = "5x7x3";
  EXPECT_EQ(cmd_eval((dir_ / "head.json").string(), "ex1", opt, io()), kExitError);
  opt.grid.clear();
  EXPECT_EQ(cmd_eval((dir_ / "head.json").string(), "ex4", opt, io()), kExitOk);
  EXPECT_EQ(cmd_eval((dir_ / "head.json").string(), "motivation", opt, io()), kExitError);
}

TEST_F(CliTest, AuditOfTamperedConvexCheckpoint) {
  const ValueNetwork net(convex_net_spec(2, 2));
  ParamVector p = net.zero_params();
  p.matrix("W0") << 1.0, 0.0, 0.0, 1.0;
  p.matrix("W1") << -1.0, 0.5;
  // Written directly so the negative weight survives: V = -relu(x1) + 0.5 relu(x2).
  write("tampered.json", checkpoint_to_json(net.spec(), p));
  AuditOptions opt;
  opt.out_dir = (dir_ / "au").string();
  EXPECT_EQ(cmd_audit((dir_ / "tampered.json").string(), "ex1", opt, io()), kExitAuditFailed);
  const json a = json::parse(slurp(dir_ / "au" / "audit.json"));
  EXPECT_GE(a["violations"].get<long>(), 1);
  EXPECT_EQ(a["pairs"], 10000);

  p.matrix("W1")(0, 0) = 1.0;
  write("honest.json", checkpoint_to_json(net.spec(), p));
  EXPECT_EQ(cmd_audit((dir_ / "honest.json").string(), "ex1", opt, io()), kExitOk);
  EXPECT_EQ(json::parse(slurp(dir_ / "au" / "audit.json"))["violations"], 0);
}

TEST_F(CliTest, AuditOfSmoothNetworkUsesMinors) {
  const ValueNetwork net = tu::quadratic_head();
  save_checkpoint(dir_ / "cvx.json", net.spec(), tu::quadratic_head_params(net, Eigen::Vector2d(0.5, 1.0)));
  save_checkpoint(dir_ / "saddle.json", net.spec(), tu::quadratic_head_params(net, Eigen::Vector2d(0.5, -1.0)));
  AuditOptions opt;
  opt.pairs = 500;
  opt.out_dir = (dir_ / "au").string();
  EXPECT_EQ(cmd_audit((dir_ / "cvx.json").string(), "ex1", opt, io()), kExitOk);
  const json a = json::parse(slurp(dir_ / "au" / "audit.json"));
  EXPECT_EQ(a["kind"], "leading_minors");
  EXPECT_EQ(a["fraction"], 1.0);
  EXPECT_EQ(cmd_audit((dir_ / "saddle.json").string(), "ex1", opt, io()), kExitAuditFailed);
}

TEST_F(CliTest, SameSeedGivesByteIdenticalArtifacts) {
  ASSERT_NE(train(small_config("a"), "a.json"), kExitError) << err_.str();
  ASSERT_NE(train(small_config("b"), "b.json"), kExitError) << err_.str();
  EXPECT_EQ(slurp(dir_ / "a" / "history.csv"), slurp(dir_ / "b" / "history.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "checkpoint.json"), slurp(dir_ / "b" / "checkpoint.json"));
  EvalOptions opt;
  opt.grid = "11x11";
  opt.out_dir = (dir_ / "ea").string();
  ASSERT_EQ(cmd_eval((dir_ / "a" / "checkpoint.json").string(), "ex1", opt, io()), kExitOk);
  opt.out_dir = (dir_ / "eb").string();
  ASSERT_EQ(cmd_eval((dir_ / "b" / "checkpoint.json").string(), "ex1", opt, io()), kExitOk);
  EXPECT_EQ(slurp(dir_ / "ea" / "metrics.json"), slurp(dir_ / "eb" / "metrics.json"));
  EXPECT_EQ(slurp(dir_ / "ea" / "surface.csv"), slurp(dir_ / "eb" / "surface.csv"));

  json other = small_config("c");
  other["seed"] = 4;
  train(other, "c.json");
  EXPECT_NE(slurp(dir_ / "a" / "history.csv"), slurp(dir_ / "c" / "history.csv"));
}

TEST_F(CliTest, ManifestRoundTrip) {
  ASSERT_NE(train(small_config("run")), kExitError) << err_.str();
  json manifest = json::parse(slurp(dir_ / "run" / "manifest.json"));
  for (const char* key : {"status", "message", "epochs"}) manifest.erase(key);
  const RunConfig again = parse_run_config(manifest, dir_);
  EXPECT_EQ(again.to_json(), manifest);

  // Retraining from the manifest reproduces the checkpoint, and eval reproduces the metrics.
  manifest["out"] = "rerun";
  ASSERT_NE(train(manifest, "rerun.json"), kExitError) << err_.str();
  EXPECT_EQ(slurp(dir_ / "run" / "checkpoint.json"), slurp(dir_ / "rerun" / "checkpoint.json"));
  EvalOptions opt;
  opt.out_dir = (dir_ / "e1").string();
  ASSERT_EQ(cmd_eval((dir_ / "run" / "checkpoint.json").string(), manifest["problem"], opt, io()), kExitOk);
  opt.out_dir = (dir_ / "e2").string();
  ASSERT_EQ(cmd_eval((dir_ / "rerun" / "checkpoint.json").string(), manifest["problem"], opt, io()), kExitOk);
  EXPECT_EQ(slurp(dir_ / "e1" / "metrics.json"), slurp(dir_ / "e2" / "metrics.json"));
}

TEST_F(CliTest, DefaultsForFiniteHorizonUseStrips) {
  const RunConfig cfg = parse_run_config(json{{"problem", "ex4"}}, dir_);
  EXPECT_TRUE(cfg.strips);
  EXPECT_EQ(cfg.network.family, Family::PartialConvexNet);
  EXPECT_EQ(cfg.schedule(10.0).dt(), 0.5);
  EXPECT_EQ(cfg.out_dir, dir_ / "run");
  EXPECT_THROW(parse_run_config(json{{"problem", "ex1"}, {"strips", true}}, dir_), ConfigError);
  EXPECT_THROW(parse_run_config(json{{"problem", "ex4"}, {"method", "penalty"}, {"strips", true}}, dir_), ConfigError);
}

TEST_F(CliTest, OracleCommand) {
  OracleOptions opt;
  opt.out_dir = (dir_ / "or").string();
  ASSERT_EQ(cmd_oracle("motivation", opt, io()), kExitOk) << err_.str();
  const json o = json::parse(slurp(dir_ / "or" / "oracle.json"));
  EXPECT_TRUE(o["verified"].get<bool>());
  EXPECT_NEAR(o["riccati_k"].get<double>(), 1 + std::sqrt(2.0), 1e-15);
  EXPECT_LT(o["rejected_root"].get<double>(), 0.0);

  opt.fd_eps = 1e-2;
  opt.nx = 41;
  opt.t_start = 9.0;
  ASSERT_EQ(cmd_oracle("ex4", opt, io()), kExitOk) << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "or" / "fd.csv"));
  EXPECT_EQ(cmd_oracle("ex1", opt, io()), kExitError);
}
