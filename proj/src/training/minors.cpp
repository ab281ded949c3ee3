#include "vhjb/training/minors.hpp"

#include <stdexcept>

namespace vhjb {

namespace {

double lu_determinant(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 1.0;
  return Eigen::PartialPivLU<Eigen::MatrixXd>(m).determinant();
}

Eigen::MatrixXd drop_row_col(const Eigen::MatrixXd& m, Eigen::Index r, Eigen::Index c) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd out(n - 1, n - 1);
  for (Eigen::Index i = 0, oi = 0; i < n; ++i) {
    if (i == r) continue;
    for (Eigen::Index j = 0, oj = 0; j < n; ++j) {
      if (j == c) continue;
      out(oi, oj++) = m(i, j);
    }
    ++oi;
  }
  return out;
}

}  // namespace

Eigen::VectorXd principal_minors(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("principal_minors needs a square matrix");
  const Eigen::Index n = h.rows();
  Eigen::VectorXd minors(n);
  for (Eigen::Index k = 1; k <= n; ++k) minors(k - 1) = lu_determinant(h.topLeftCorner(k, k));
  return minors;
}

Eigen::MatrixXd leading_minor_gradient(const Eigen::MatrixXd& h, int k) {
  if (k < 1 || k > h.rows()) throw std::invalid_argument("leading_minor_gradient: k out of range");
  const Eigen::MatrixXd block = h.topLeftCorner(k, k);
  Eigen::MatrixXd cof(k, k);
  if (k == 1) {
    cof(0, 0) = 1.0;
    return cof;
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double sign = (i + j) % 2 == 0 ? 1.0 : -1.0;
      cof(i, j) = sign * lu_determinant(drop_row_col(block, i, j));
    }
  }
  return cof;
}

bool minors_positive(const Eigen::MatrixXd& h) { return (principal_minors(h).array() > 0.0).all(); }

}  // namespace vhjb
