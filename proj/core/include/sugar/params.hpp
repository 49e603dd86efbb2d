#pragma once

#include "sugar/tensor.hpp"

#include <string>
#include <vector>

namespace sugar {

/// Mutable view of one named parameter array (column-major Eigen storage,
/// exposed row-major by name/rows/cols wherever it is serialized).
struct BlockRef {
  std::string name;
  Mat* value = nullptr;
};

struct ConstBlockRef {
  std::string name;
  const Mat* value = nullptr;
};

using BlockList = std::vector<BlockRef>;
using ConstBlockList = std::vector<ConstBlockRef>;

inline ConstBlockList as_const(const BlockList& blocks) {
  ConstBlockList out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back({b.name, b.value});
  return out;
}

/// Total number of scalar parameters across blocks.
Eigen::Index parameter_count(const ConstBlockList& blocks);

}  // namespace sugar
