#pragma once

#include <Eigen/Dense>

namespace vhjb {

/// Determinants of the leading k x k blocks of `h`, k = 1..n (LU with partial pivoting).
Eigen::VectorXd principal_minors(const Eigen::MatrixXd& h);

/// Cofactor matrix of the leading k x k block of `h`: d det(H_k) / d H_ij.
Eigen::MatrixXd leading_minor_gradient(const Eigen::MatrixXd& h, int k);

/// True when every leading principal minor is strictly positive.
bool minors_positive(const Eigen::MatrixXd& h);

}  // namespace vhjb
