#include "vhjb/networks/network.hpp"

#include "vhjb/util/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace vhjb {

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  if (name == "softplus") return Activation::Softplus;
  if (name == "square") return Activation::Square;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string to_string(Family family) {
  switch (family) {
    case Family::SmoothMLP: return "smooth_mlp";
    case Family::ConvexNet: return "convex_net";
    case Family::PartialConvexNet: return "partial_convex_net";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "smooth_mlp") return Family::SmoothMLP;
  if (name == "convex_net") return Family::ConvexNet;
  if (name == "partial_convex_net") return Family::PartialConvexNet;
  throw std::invalid_argument("unknown network family '" + name + "'");
}

NetworkSpec smooth_mlp_spec(int input_dim, std::vector<int> hidden, Activation act) {
  NetworkSpec spec;
  spec.family = Family::SmoothMLP;
  spec.widths.push_back(input_dim);
  spec.widths.insert(spec.widths.end(), hidden.begin(), hidden.end());
  spec.widths.push_back(1);
  spec.activation = act;
  return spec;
}

NetworkSpec convex_net_spec(int state_dim, int hidden, Activation act) {
  NetworkSpec spec;
  spec.family = Family::ConvexNet;
  spec.widths = {state_dim, hidden};
  spec.activation = act;
  return spec;
}

NetworkSpec partial_convex_net_spec(int state_dim, int hidden, Activation act, int coupling, int time_features,
                                    int f1_width, int f2_width) {
  NetworkSpec spec;
  spec.family = Family::PartialConvexNet;
  spec.widths = {state_dim, hidden, coupling, time_features, f1_width, f2_width};
  spec.activation = act;
  return spec;
}

namespace {

class LayoutBuilder {
 public:
  Eigen::Index add(std::string name, int rows, int cols, bool positive = false, bool bias = false) {
    ParamBlock b;
    b.name = std::move(name);
    b.offset = cursor_;
    b.rows = rows;
    b.cols = cols;
    b.positive = positive;
    b.bias = bias;
    cursor_ += b.size();
    blocks_.push_back(b);
    return b.offset;
  }
  std::vector<ParamBlock> take() { return std::move(blocks_); }

 private:
  Eigen::Index cursor_ = 0;
  std::vector<ParamBlock> blocks_;
};

void require_positive_widths(const NetworkSpec& spec, std::size_t expected) {
  if (expected != 0 && spec.widths.size() != expected) {
    throw std::invalid_argument(to_string(spec.family) + " expects " + std::to_string(expected) + " widths");
  }
  for (int w : spec.widths) {
    if (w <= 0) throw std::invalid_argument("network widths must be positive");
  }
}

// One tanh hidden layer: in -> width -> out, blocks prefixed by `prefix`.
int add_tanh_block(Program<double>& prog, LayoutBuilder& lb, const std::string& prefix, int in, int in_units,
                   int width, int out_units) {
  const auto a = lb.add(prefix + ".A", width, in_units);
  const auto a_bias = lb.add(prefix + ".a", width, 1, false, true);
  int h = prog.add_affine(in, width, a, a_bias);
  h = prog.add_activation(h, Activation::Tanh);
  const auto b = lb.add(prefix + ".B", out_units, width);
  const auto b_bias = lb.add(prefix + ".b", out_units, 1, false, true);
  return prog.add_affine(h, out_units, b, b_bias);
}

}  // namespace

ValueNetwork::ValueNetwork(NetworkSpec spec) : spec_(std::move(spec)) {
  LayoutBuilder lb;
  switch (spec_.family) {
    case Family::SmoothMLP: {
      require_positive_widths(spec_, 0);
      if (spec_.widths.size() < 3) throw std::invalid_argument("smooth_mlp needs at least one hidden layer");
      if (spec_.widths.back() != 1) throw std::invalid_argument("smooth_mlp output width must be 1");
      if (!is_c2(spec_.activation)) throw std::invalid_argument("smooth_mlp activation must be C2");
      program_ = Program<double>(spec_.widths.front());
      int node = program_.add_input(0, spec_.widths.front());
      const int layers = static_cast<int>(spec_.widths.size()) - 1;
      for (int l = 0; l < layers; ++l) {
        const auto w = lb.add("W" + std::to_string(l), spec_.widths[l + 1], spec_.widths[l]);
        const auto b = lb.add("b" + std::to_string(l), spec_.widths[l + 1], 1, false, true);
        node = program_.add_affine(node, spec_.widths[l + 1], w, b);
        if (l + 1 < layers) node = program_.add_activation(node, spec_.activation, spec_.beta);
      }
      break;
    }
    case Family::ConvexNet: {
      require_positive_widths(spec_, 2);
      const int d = spec_.widths[0];
      const int n = spec_.widths[1];
      if (spec_.activation != Activation::Relu && spec_.activation != Activation::Softplus) {
        throw std::invalid_argument("convex_net activation must be relu or softplus");
      }
      program_ = Program<double>(d);
      const int x = program_.add_input(0, d);
      const auto w0 = lb.add("W0", n, d);
      const auto b0 = lb.add("b0", n, 1, false, true);
      const auto w1 = lb.add("W1", 1, n, true);
      const auto b1 = lb.add("b1", 1, 1, false, true);
      const auto f = lb.add("f", 1, d);
      int h = program_.add_affine(x, n, w0, b0);
      h = program_.add_activation(h, spec_.activation, spec_.beta);
      const int y = program_.add_affine(h, 1, w1, b1);
      const int feed = program_.add_affine(x, 1, f);
      program_.add_sum(y, feed);
      break;
    }
    case Family::PartialConvexNet: {
      require_positive_widths(spec_, 6);
      const int dx = spec_.widths[0];
      const int n = spec_.widths[1];
      const int k = spec_.widths[2];
      const int khat = spec_.widths[3];
      if (spec_.activation != Activation::Relu && spec_.activation != Activation::Softplus) {
        throw std::invalid_argument("partial_convex_net activation must be relu or softplus");
      }
      program_ = Program<double>(1 + dx);
      const int t = program_.add_input(0, 1);
      const int x = program_.add_input(1, dx);
      const int yhat = add_tanh_block(program_, lb, "F1", t, 1, spec_.widths[4], khat);
      const int coupling = add_tanh_block(program_, lb, "F2", yhat, khat, spec_.widths[5], k);
      const auto w0 = lb.add("W0", n, dx);
      const auto w1 = lb.add("W1", n, k);
      const auto b0 = lb.add("b0", n, 1, false, true);
      const auto w2 = lb.add("W2", 1, n, true);
      const auto b1 = lb.add("b1", 1, 1, false, true);
      const int zx = program_.add_affine(x, n, w0, b0);
      const int zt = program_.add_affine(coupling, n, w1);
      int h = program_.add_sum(zx, zt);
      h = program_.add_activation(h, spec_.activation, spec_.beta);
      program_.add_affine(h, 1, w2, b1);
      break;
    }
  }
  layout_ = lb.take();
}

std::string ValueNetwork::positive_block() const {
  switch (spec_.family) {
    case Family::ConvexNet: return "W1";
    case Family::PartialConvexNet: return "W2";
    case Family::SmoothMLP: break;
  }
  return {};
}

std::string ValueNetwork::output_block() const {
  if (spec_.family == Family::SmoothMLP) return "W" + std::to_string(spec_.widths.size() - 2);
  return positive_block();
}

ParamVector ValueNetwork::init_params(std::mt19937_64& rng) const {
  ParamVector params(layout_);
  for (const auto& b : layout_) {
    auto seg = params.values().segment(b.offset, b.size());
    if (b.bias) {
      seg.setZero();
    } else if (b.positive) {
      const double hi = 1.0 / std::sqrt(static_cast<double>(b.cols));
      for (auto& v : seg) v = uniform(rng, kPositivityFloor, std::max(hi, 2 * kPositivityFloor));
    } else {
      const double r = 1.0 / std::sqrt(static_cast<double>(b.cols));
      for (auto& v : seg) v = uniform(rng, -r, r);
    }
  }
  return params;
}

void ValueNetwork::check_params(const ParamVector& params) const {
  const auto& other = params.layout();
  bool same = other.size() == layout_.size();
  for (std::size_t i = 0; same && i < other.size(); ++i) {
    same = other[i].name == layout_[i].name && other[i].offset == layout_[i].offset &&
           other[i].rows == layout_[i].rows && other[i].cols == layout_[i].cols;
  }
  if (!same || params.size() != param_count()) {
    throw DimensionMismatch("parameter layout does not match the " + to_string(spec_.family) + " architecture");
  }
}

Tape<double> ValueNetwork::evaluate(const ParamVector& params, const Eigen::MatrixXd& inputs, int order) const {
  check_params(params);
  return program_.forward(params.values(), inputs, order);
}

Scalar2Jet<double> eval_jet(const ValueNetwork& net, const ParamVector& params, const Eigen::VectorXd& input,
                            int order) {
  const Tape<double> tape = net.evaluate(params, input, order);
  return tape.output().at(0, 0);
}

double forward(const ValueNetwork& net, const ParamVector& params, const Eigen::VectorXd& input) {
  return net.evaluate(params, input, 0).output().val(0, 0);
}

Eigen::VectorXd forward_batch(const ValueNetwork& net, const ParamVector& params, const Eigen::MatrixXd& inputs) {
  return net.evaluate(params, inputs, 0).output().val.row(0).transpose();
}

void project_positive_inplace(const ValueNetwork& net, ParamVector& params) {
  net.check_params(params);
  for (const auto& b : params.layout()) {
    if (!b.positive) continue;
    auto seg = params.values().segment(b.offset, b.size());
    for (auto& v : seg) v = std::max(v, kPositivityFloor);
  }
}

ParamVector project_positive(const ValueNetwork& net, ParamVector params) {
  project_positive_inplace(net, params);
  return params;
}

}  // namespace vhjb
