#pragma once

// Jet-valued feed-forward programs.
//
// A Program is a small DAG of affine maps, elementwise activations and sums whose
// weights live in one flat parameter vector. forward() pushes second-order jets
// (value, input-gradient, packed input-Hessian) through the graph for a batch of
// inputs and keeps every intermediate on a Tape. backward() runs reverse mode over
// that jet-valued pass, so losses that depend on input-derivatives of the output
// get exact parameter gradients (third-order mixed derivatives included).

#include "vhjb/autodiff/jet.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace vhjb {

enum class Activation { Identity, Tanh, Relu, Softplus, Square };

inline std::string to_string(Activation act) {
  switch (act) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Softplus: return "softplus";
    case Activation::Square: return "square";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name);

/// True when the activation has continuous second derivatives everywhere.
constexpr bool is_c2(Activation act) { return act != Activation::Relu; }

/// Elementwise activation value and derivatives up to `max_order` (<= 3).
template <typename Scalar>
struct ActivationDerivatives {
  MatrixX<Scalar> d0, d1, d2, d3;
};

template <typename Scalar>
void activation_derivatives(Activation act, Scalar beta, const MatrixX<Scalar>& u, int max_order,
                            ActivationDerivatives<Scalar>& out) {
  const auto rows = u.rows();
  const auto cols = u.cols();
  auto fill_zero = [&](MatrixX<Scalar>& m) { m.setZero(rows, cols); };
  switch (act) {
    case Activation::Identity:
      out.d0 = u;
      if (max_order >= 1) out.d1.setOnes(rows, cols);
      if (max_order >= 2) fill_zero(out.d2);
      if (max_order >= 3) fill_zero(out.d3);
      break;
    case Activation::Tanh: {
      out.d0 = u.array().tanh().matrix();
      const auto t = out.d0.array();
      if (max_order >= 1) out.d1 = (Scalar(1) - t.square()).matrix();
      if (max_order >= 2) out.d2 = (Scalar(-2) * t * out.d1.array()).matrix();
      if (max_order >= 3) out.d3 = ((Scalar(6) * t.square() - Scalar(2)) * out.d1.array()).matrix();
      break;
    }
    case Activation::Relu:
      out.d0 = u.array().max(Scalar(0)).matrix();
      // Derivative at exactly 0 is taken as 0.
      if (max_order >= 1) out.d1 = (u.array() > Scalar(0)).template cast<Scalar>().matrix();
      if (max_order >= 2) fill_zero(out.d2);
      if (max_order >= 3) fill_zero(out.d3);
      break;
    case Activation::Softplus: {
      // log(1 + exp(beta u)) / beta, evaluated without overflow.
      out.d0 = u.unaryExpr([beta](Scalar v) {
        const Scalar z = beta * v;
        return (z > Scalar(0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) / beta;
      });
      if (max_order >= 1) {
        out.d1 = u.unaryExpr([beta](Scalar v) {
          const Scalar z = beta * v;
          if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
          const Scalar e = std::exp(z);
          return e / (Scalar(1) + e);
        });
      }
      const auto s = out.d1.array();
      if (max_order >= 2) out.d2 = (beta * s * (Scalar(1) - s)).matrix();
      if (max_order >= 3) out.d3 = (beta * beta * s * (Scalar(1) - s) * (Scalar(1) - Scalar(2) * s)).matrix();
      break;
    }
    case Activation::Square:
      out.d0 = u.array().square().matrix();
      if (max_order >= 1) out.d1 = (Scalar(2) * u.array()).matrix();
      if (max_order >= 2) out.d2.setConstant(rows, cols, Scalar(2));
      if (max_order >= 3) fill_zero(out.d3);
      break;
  }
}

template <typename Scalar>
struct Tape {
  int order = 0;
  std::vector<JetBatch<Scalar>> nodes;
  std::vector<ActivationDerivatives<Scalar>> derivs;  // indexed by node, filled for activations

  const JetBatch<Scalar>& output() const { return nodes.back(); }
};

template <typename Scalar>
class Program {
 public:
  enum class OpKind { Input, Affine, Activate, Sum };

  struct Op {
    OpKind kind = OpKind::Input;
    int in0 = -1;
    int in1 = -1;
    int units = 0;
    // Input: selects coordinates [first, first + units).
    int first = 0;
    // Affine: row-major weight block (units x in0.units) and optional bias.
    Eigen::Index weight_offset = -1;
    Eigen::Index bias_offset = -1;
    Activation act = Activation::Identity;
    Scalar beta{1};
  };

  explicit Program(int input_dim = 0) : input_dim_(input_dim) {}

  int input_dim() const { return input_dim_; }
  const std::vector<Op>& ops() const { return ops_; }

  int add_input(int first, int count) {
    if (first < 0 || count <= 0 || first + count > input_dim_) {
      throw DimensionMismatch("input slice out of range");
    }
    Op op;
    op.kind = OpKind::Input;
    op.first = first;
    op.units = count;
    return push(op);
  }

  /// z = W u + b with W stored row-major at weight_offset; bias_offset < 0 means no bias.
  int add_affine(int in, int units, Eigen::Index weight_offset, Eigen::Index bias_offset = -1) {
    Op op;
    op.kind = OpKind::Affine;
    op.in0 = in;
    op.units = units;
    op.weight_offset = weight_offset;
    op.bias_offset = bias_offset;
    return push(op);
  }

  int add_activation(int in, Activation act, Scalar beta = Scalar(1)) {
    Op op;
    op.kind = OpKind::Activate;
    op.in0 = in;
    op.units = ops_.at(in).units;
    op.act = act;
    op.beta = beta;
    return push(op);
  }

  int add_sum(int a, int b) {
    if (ops_.at(a).units != ops_.at(b).units) throw DimensionMismatch("sum of nodes with different widths");
    Op op;
    op.kind = OpKind::Sum;
    op.in0 = a;
    op.in1 = b;
    op.units = ops_[a].units;
    return push(op);
  }

  bool is_c2() const {
    for (const auto& op : ops_) {
      if (op.kind == OpKind::Activate && !vhjb::is_c2(op.act)) return false;
    }
    return true;
  }

  /// Evaluates jets of every node for the columns of `inputs` (input_dim x points).
  Tape<Scalar> forward(const Eigen::Ref<const VectorX<Scalar>>& params, const MatrixX<Scalar>& inputs,
                       int order) const {
    if (inputs.rows() != input_dim_) {
      throw DimensionMismatch("input has " + std::to_string(inputs.rows()) + " coordinates, program expects " +
                              std::to_string(input_dim_));
    }
    if (order < 0 || order > 2) throw std::invalid_argument("jet order must be 0, 1 or 2");
    if (order == 2 && !is_c2()) {
      throw UnsupportedCapability("input-Hessian requested through a ReLU activation");
    }
    const Eigen::Index n = inputs.cols();
    const int dim = input_dim_;
    Tape<Scalar> tape;
    tape.order = order;
    tape.nodes.resize(ops_.size());
    tape.derivs.resize(ops_.size());
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      const Op& op = ops_[k];
      JetBatch<Scalar>& z = tape.nodes[k];
      switch (op.kind) {
        case OpKind::Input: {
          z = JetBatch<Scalar>(op.units, n, dim, order);
          z.val = inputs.middleRows(op.first, op.units);
          if (order >= 1) {
            for (int i = 0; i < op.units; ++i) z.grad[op.first + i].row(i).setOnes();
          }
          break;
        }
        case OpKind::Affine: {
          const JetBatch<Scalar>& u = tape.nodes[op.in0];
          const auto w = weight(params, op, u.units());
          z.input_dim = dim;
          z.order = order;
          z.val.noalias() = w * u.val;
          if (op.bias_offset >= 0) z.val.colwise() += params.segment(op.bias_offset, op.units);
          z.grad.resize(u.grad.size());
          for (std::size_t d = 0; d < u.grad.size(); ++d) z.grad[d].noalias() = w * u.grad[d];
          z.hess.resize(u.hess.size());
          for (std::size_t p = 0; p < u.hess.size(); ++p) z.hess[p].noalias() = w * u.hess[p];
          break;
        }
        case OpKind::Activate: {
          const JetBatch<Scalar>& u = tape.nodes[op.in0];
          ActivationDerivatives<Scalar>& ad = tape.derivs[k];
          activation_derivatives(op.act, op.beta, u.val, order + 1, ad);
          z.input_dim = dim;
          z.order = order;
          z.val = ad.d0;
          z.grad.resize(u.grad.size());
          for (std::size_t d = 0; d < u.grad.size(); ++d) {
            z.grad[d] = (ad.d1.array() * u.grad[d].array()).matrix();
          }
          z.hess.resize(u.hess.size());
          for (int i = 0; i < dim && order >= 2; ++i) {
            for (int j = i; j < dim; ++j) {
              const int p = packed_index(i, j, dim);
              z.hess[p] = (ad.d2.array() * u.grad[i].array() * u.grad[j].array() +
                           ad.d1.array() * u.hess[p].array())
                              .matrix();
            }
          }
          break;
        }
        case OpKind::Sum: {
          z = tape.nodes[op.in0];
          z += tape.nodes[op.in1];
          break;
        }
      }
    }
    return tape;
  }

  /// Accumulates d(loss)/d(params) into `param_grad`, given the adjoint of the
  /// output node's jet (same order as the tape or lower).
  void backward(const Eigen::Ref<const VectorX<Scalar>>& params, const Tape<Scalar>& tape,
                const JetBatch<Scalar>& output_adjoint, Eigen::Ref<VectorX<Scalar>> param_grad) const {
    if (param_grad.size() != params.size()) throw DimensionMismatch("gradient/parameter length mismatch");
    const int dim = input_dim_;
    const int order = tape.order;
    std::vector<JetBatch<Scalar>> adj(ops_.size());
    std::vector<bool> live(ops_.size(), false);
    adj.back() = output_adjoint;
    pad_to_order(adj.back(), order, dim);
    live.back() = true;

    auto accumulate = [&](int node, const JetBatch<Scalar>& contribution) {
      if (ops_[node].kind == OpKind::Input) return;
      if (!live[node]) {
        adj[node] = contribution;
        live[node] = true;
      } else {
        adj[node] += contribution;
      }
    };

    for (int k = static_cast<int>(ops_.size()) - 1; k >= 0; --k) {
      if (!live[k]) continue;
      const Op& op = ops_[k];
      const JetBatch<Scalar>& zbar = adj[k];
      switch (op.kind) {
        case OpKind::Input: break;
        case OpKind::Affine: {
          const JetBatch<Scalar>& u = tape.nodes[op.in0];
          const int in_units = u.units();
          Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> wbar(
              param_grad.data() + op.weight_offset, op.units, in_units);
          wbar.noalias() += zbar.val * u.val.transpose();
          for (std::size_t d = 0; d < zbar.grad.size(); ++d) wbar.noalias() += zbar.grad[d] * u.grad[d].transpose();
          for (std::size_t p = 0; p < zbar.hess.size(); ++p) wbar.noalias() += zbar.hess[p] * u.hess[p].transpose();
          if (op.bias_offset >= 0) param_grad.segment(op.bias_offset, op.units) += zbar.val.rowwise().sum();
          if (ops_[op.in0].kind != OpKind::Input) {
            const auto w = weight(params, op, in_units);
            JetBatch<Scalar> ubar;
            ubar.input_dim = dim;
            ubar.order = order;
            ubar.val.noalias() = w.transpose() * zbar.val;
            ubar.grad.resize(zbar.grad.size());
            for (std::size_t d = 0; d < zbar.grad.size(); ++d) ubar.grad[d].noalias() = w.transpose() * zbar.grad[d];
            ubar.hess.resize(zbar.hess.size());
            for (std::size_t p = 0; p < zbar.hess.size(); ++p) ubar.hess[p].noalias() = w.transpose() * zbar.hess[p];
            accumulate(op.in0, ubar);
          }
          break;
        }
        case OpKind::Activate: {
          if (ops_[op.in0].kind == OpKind::Input) break;
          const JetBatch<Scalar>& u = tape.nodes[op.in0];
          const ActivationDerivatives<Scalar>& ad = tape.derivs[k];
          JetBatch<Scalar> ubar;
          ubar.input_dim = dim;
          ubar.order = order;
          ubar.val = (zbar.val.array() * ad.d1.array()).matrix();
          if (order >= 1) {
            ubar.grad.resize(dim);
            for (int d = 0; d < dim; ++d) {
              ubar.val.array() += zbar.grad[d].array() * ad.d2.array() * u.grad[d].array();
              ubar.grad[d] = (zbar.grad[d].array() * ad.d1.array()).matrix();
            }
          }
          if (order >= 2) {
            ubar.hess.resize(packed_size(dim));
            for (int i = 0; i < dim; ++i) {
              for (int j = i; j < dim; ++j) {
                const int p = packed_index(i, j, dim);
                const auto hb = zbar.hess[p].array();
                ubar.val.array() +=
                    hb * (ad.d3.array() * u.grad[i].array() * u.grad[j].array() + ad.d2.array() * u.hess[p].array());
                ubar.grad[i].array() += hb * ad.d2.array() * u.grad[j].array();
                ubar.grad[j].array() += hb * ad.d2.array() * u.grad[i].array();
                ubar.hess[p] = (hb * ad.d1.array()).matrix();
              }
            }
          }
          accumulate(op.in0, ubar);
          break;
        }
        case OpKind::Sum:
          accumulate(op.in0, zbar);
          accumulate(op.in1, zbar);
          break;
      }
    }
  }

 private:
  int push(const Op& op) {
    if (op.in0 >= static_cast<int>(ops_.size()) || op.in1 >= static_cast<int>(ops_.size())) {
      throw std::invalid_argument("program node refers to a later node");
    }
    ops_.push_back(op);
    return static_cast<int>(ops_.size()) - 1;
  }

  Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> weight(
      const Eigen::Ref<const VectorX<Scalar>>& params, const Op& op, int in_units) const {
    return {params.data() + op.weight_offset, op.units, in_units};
  }

  static void pad_to_order(JetBatch<Scalar>& b, int order, int dim) {
    const auto rows = b.val.rows();
    const auto cols = b.val.cols();
    b.input_dim = dim;
    if (order >= 1 && static_cast<int>(b.grad.size()) != dim) b.grad.assign(dim, MatrixX<Scalar>::Zero(rows, cols));
    if (order >= 2 && static_cast<int>(b.hess.size()) != packed_size(dim)) {
      b.hess.assign(packed_size(dim), MatrixX<Scalar>::Zero(rows, cols));
    }
    if (order < 2) b.hess.clear();
    if (order < 1) b.grad.clear();
    b.order = order;
  }

  int input_dim_;
  std::vector<Op> ops_;
};

}  // namespace vhjb
