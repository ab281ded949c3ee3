#include "vhjb/autodiff/param_vector.hpp"

#include <stdexcept>
#include <utility>

namespace vhjb {

namespace {

Eigen::Index layout_total(const std::vector<ParamBlock>& layout) {
  return layout.empty() ? 0 : layout.back().end();
}

}  // namespace

ParamVector::ParamVector(std::vector<ParamBlock> layout)
    : ParamVector(std::move(layout), Eigen::VectorXd()) {}

ParamVector::ParamVector(std::vector<ParamBlock> layout, Eigen::VectorXd values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (values_.size() == 0) values_ = Eigen::VectorXd::Zero(layout_total(layout_));
  validate_layout(layout_, values_.size());
}

void ParamVector::validate_layout(const std::vector<ParamBlock>& layout, Eigen::Index total) {
  Eigen::Index cursor = 0;
  for (const auto& b : layout) {
    if (b.rows < 0 || b.cols < 0) {
      throw std::invalid_argument("param block '" + b.name + "' has negative shape");
    }
    if (b.offset != cursor) {
      throw std::invalid_argument("param block '" + b.name + "' is not contiguous with its predecessor");
    }
    cursor = b.end();
  }
  if (cursor != total) {
    throw std::invalid_argument("param layout covers " + std::to_string(cursor) + " entries but vector has " +
                                std::to_string(total));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    for (std::size_t j = i + 1; j < layout.size(); ++j) {
      if (layout[i].name == layout[j].name) {
        throw std::invalid_argument("duplicate param block '" + layout[i].name + "'");
      }
    }
  }
}

const ParamBlock& ParamVector::block(std::string_view name) const {
  for (const auto& b : layout_) {
    if (b.name == name) return b;
  }
  throw std::out_of_range("no param block named '" + std::string(name) + "'");
}

bool ParamVector::has_block(std::string_view name) const {
  for (const auto& b : layout_) {
    if (b.name == name) return true;
  }
  return false;
}

Eigen::Map<RowMajorMatrix> ParamVector::matrix(std::string_view name) {
  const ParamBlock& b = block(name);
  return {values_.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<const RowMajorMatrix> ParamVector::matrix(std::string_view name) const {
  const ParamBlock& b = block(name);
  return {values_.data() + b.offset, b.rows, b.cols};
}

}  // namespace vhjb
