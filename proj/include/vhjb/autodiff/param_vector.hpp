#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace vhjb {

/// A named row-major matrix block inside a flat parameter vector.
struct ParamBlock {
  std::string name;
  Eigen::Index offset = 0;
  int rows = 0;
  int cols = 0;
  // Entries are kept >= the positivity floor by project_positive.
  bool positive = false;
  bool bias = false;

  Eigen::Index size() const { return static_cast<Eigen::Index>(rows) * cols; }
  Eigen::Index end() const { return offset + size(); }
};

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Flat parameter storage plus the layout that names its blocks.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<ParamBlock> layout);
  ParamVector(std::vector<ParamBlock> layout, Eigen::VectorXd values);

  const std::vector<ParamBlock>& layout() const { return layout_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  Eigen::Index size() const { return values_.size(); }

  const ParamBlock& block(std::string_view name) const;
  bool has_block(std::string_view name) const;

  Eigen::Map<RowMajorMatrix> matrix(std::string_view name);
  Eigen::Map<const RowMajorMatrix> matrix(std::string_view name) const;

  /// Throws std::invalid_argument unless blocks are contiguous, non-overlapping
  /// and cover the whole vector.
  static void validate_layout(const std::vector<ParamBlock>& layout, Eigen::Index total);

 private:
  std::vector<ParamBlock> layout_;
  Eigen::VectorXd values_;
};

/// Parameter-gradient of a scalar loss, aligned with a ParamVector.
struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

}  // namespace vhjb
