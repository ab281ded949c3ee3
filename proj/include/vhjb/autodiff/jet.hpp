#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vhjb {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when a derivative order is requested that the network cannot provide
/// (input-Hessians through ReLU units).
class UnsupportedCapability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Number of entries in the packed upper triangle of a dim x dim symmetric matrix.
constexpr int packed_size(int dim) { return dim * (dim + 1) / 2; }

/// Position of entry (i, j) in the row-wise packed upper triangle.
constexpr int packed_index(int i, int j, int dim) {
  if (i > j) {
    const int tmp = i;
    i = j;
    j = tmp;
  }
  return i * dim - i * (i - 1) / 2 + (j - i);
}

/// Value, input-gradient and input-Hessian of a scalar function at one point.
template <typename Scalar>
struct Scalar2Jet {
  Scalar value{0};
  VectorX<Scalar> grad;
  MatrixX<Scalar> hess;
  bool has_hessian = false;

  int dim() const { return static_cast<int>(grad.size()); }

  static Scalar2Jet zero(int dim, bool with_hessian) {
    Scalar2Jet jet;
    jet.grad = VectorX<Scalar>::Zero(dim);
    jet.hess = MatrixX<Scalar>::Zero(dim, dim);
    jet.has_hessian = with_hessian;
    return jet;
  }
};

/// Jets of `units` scalar quantities at `points` inputs, laid out unit-major.
///
/// `grad[d]` holds the derivative with respect to input coordinate d, and
/// `hess[packed_index(i, j)]` the second derivative; both are units x points.
/// `order` is 0 (values only), 1 (plus gradients) or 2 (plus Hessians).
template <typename Scalar>
struct JetBatch {
  int input_dim = 0;
  int order = 0;
  MatrixX<Scalar> val;
  std::vector<MatrixX<Scalar>> grad;
  std::vector<MatrixX<Scalar>> hess;

  JetBatch() = default;
  JetBatch(int units, Eigen::Index points, int input_dim_, int order_)
      : input_dim(input_dim_), order(order_) {
    val = MatrixX<Scalar>::Zero(units, points);
    if (order >= 1) grad.assign(input_dim, MatrixX<Scalar>::Zero(units, points));
    if (order >= 2) hess.assign(packed_size(input_dim), MatrixX<Scalar>::Zero(units, points));
  }

  int units() const { return static_cast<int>(val.rows()); }
  Eigen::Index points() const { return val.cols(); }

  void set_zero() {
    val.setZero();
    for (auto& g : grad) g.setZero();
    for (auto& h : hess) h.setZero();
  }

  JetBatch& operator+=(const JetBatch& other) {
    val += other.val;
    for (std::size_t d = 0; d < grad.size(); ++d) grad[d] += other.grad[d];
    for (std::size_t p = 0; p < hess.size(); ++p) hess[p] += other.hess[p];
    return *this;
  }

  /// Extracts the jet of one unit at one point. The Hessian is expanded from
  /// packed storage, so it is symmetric bitwise.
  Scalar2Jet<Scalar> at(int unit, Eigen::Index point) const {
    Scalar2Jet<Scalar> jet = Scalar2Jet<Scalar>::zero(input_dim, order >= 2);
    jet.value = val(unit, point);
    if (order >= 1) {
      for (int d = 0; d < input_dim; ++d) jet.grad(d) = grad[d](unit, point);
    }
    if (order >= 2) {
      for (int i = 0; i < input_dim; ++i) {
        for (int j = i; j < input_dim; ++j) {
          const Scalar h = hess[packed_index(i, j, input_dim)](unit, point);
          jet.hess(i, j) = h;
          jet.hess(j, i) = h;
        }
      }
    }
    return jet;
  }
};

}  // namespace vhjb
