#include "sugar/tensor.hpp"

#include "sugar/error.hpp"
#include "sugar/params.hpp"

#include <string>

namespace sugar {

void require_finite(const Eigen::Ref<const Mat>& m, std::string_view what) {
  if (!m.allFinite()) {
    throw NumericalError("non-finite value in " + std::string(what));
  }
}

void require_shape(const Eigen::Ref<const Mat>& m, Eigen::Index rows, Eigen::Index cols,
                   std::string_view what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                     std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  }
}

Eigen::Index parameter_count(const ConstBlockList& blocks) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.value->size();
  return n;
}

}  // namespace sugar
