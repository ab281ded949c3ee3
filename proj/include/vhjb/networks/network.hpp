#pragma once

#include "vhjb/autodiff/jet.hpp"
#include "vhjb/autodiff/param_vector.hpp"
#include "vhjb/autodiff/program.hpp"

#include <random>
#include <string>
#include <vector>

namespace vhjb {

enum class Family { SmoothMLP, ConvexNet, PartialConvexNet };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Lower bound enforced on the positive output-weight block of convex families.
inline constexpr double kPositivityFloor = 1e-6;

/// Default sharpness of the softplus variant, log(1 + exp(beta x)) / beta.
inline constexpr double kSoftplusBeta = 10.0;

/// Architecture of a value network.
///
/// `widths` per family:
///   SmoothMLP        [input_dim, hidden_1, ..., hidden_L, 1]
///   ConvexNet        [state_dim, hidden]
///   PartialConvexNet [state_dim, hidden, coupling, time_features, f1_width, f2_width]
///
/// The partially convex network takes (t, x) and computes
///   y = W2 act(W0 x + W1 F2(F1(t)) + b0) + b1,
/// where F1: t -> time_features and F2: time_features -> coupling are one-hidden-layer
/// tanh networks. Convexity in x holds whenever W2 >= 0 and act is convex nondecreasing.
struct NetworkSpec {
  Family family = Family::SmoothMLP;
  std::vector<int> widths;
  Activation activation = Activation::Tanh;
  double beta = kSoftplusBeta;
};

NetworkSpec smooth_mlp_spec(int input_dim, std::vector<int> hidden, Activation act = Activation::Tanh);
NetworkSpec convex_net_spec(int state_dim, int hidden, Activation act = Activation::Relu);
NetworkSpec partial_convex_net_spec(int state_dim, int hidden = 32, Activation act = Activation::Relu,
                                    int coupling = 16, int time_features = 8, int f1_width = 16, int f2_width = 16);

class ValueNetwork {
 public:
  explicit ValueNetwork(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  Family family() const { return spec_.family; }
  int input_dim() const { return program_.input_dim(); }
  bool convex_family() const { return spec_.family != Family::SmoothMLP; }
  bool supports_hessian() const { return program_.is_c2(); }

  const std::vector<ParamBlock>& layout() const { return layout_; }
  Eigen::Index param_count() const { return layout_.empty() ? 0 : layout_.back().end(); }
  const Program<double>& program() const { return program_; }

  /// Name of the block kept positive ("W1" or "W2"); empty for SmoothMLP.
  std::string positive_block() const;
  /// Name of the weight block feeding the output unit.
  std::string output_block() const;

  ParamVector zero_params() const { return ParamVector(layout_); }
  /// Fan-in scaled uniform weights, positive blocks in [floor, 1/sqrt(n)], zero biases.
  ParamVector init_params(std::mt19937_64& rng) const;

  /// Throws DimensionMismatch if `params` was not built for this architecture.
  void check_params(const ParamVector& params) const;

  Tape<double> evaluate(const ParamVector& params, const Eigen::MatrixXd& inputs, int order) const;

 private:
  NetworkSpec spec_;
  std::vector<ParamBlock> layout_;
  Program<double> program_;
};

/// Exact value, input-gradient and (order 2) input-Hessian at one input.
Scalar2Jet<double> eval_jet(const ValueNetwork& net, const ParamVector& params, const Eigen::VectorXd& input,
                            int order = 2);

double forward(const ValueNetwork& net, const ParamVector& params, const Eigen::VectorXd& input);

/// Values at the columns of `inputs`.
Eigen::VectorXd forward_batch(const ValueNetwork& net, const ParamVector& params, const Eigen::MatrixXd& inputs);

/// Clamps the positive block to max(w, kPositivityFloor); other entries untouched.
void project_positive_inplace(const ValueNetwork& net, ParamVector& params);
ParamVector project_positive(const ValueNetwork& net, ParamVector params);

}  // namespace vhjb
