#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fairworld {

// Column-major dense feature matrix.
struct FeatureMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : n_rows(rows), n_cols(cols), data(rows * cols) {}

  double operator()(std::size_t row, std::size_t col) const { return data[col * n_rows + row]; }
  double& operator()(std::size_t row, std::size_t col) { return data[col * n_rows + row]; }
  std::span<const double> column(std::size_t col) const { return {data.data() + col * n_rows, n_rows}; }
};

// Axis-aligned regression tree. Internal nodes send `value <= threshold` left.
// Leaf values are already scaled by the learning rate.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  template <class RowAccess>
  double eval(RowAccess&& x) const {
    int k = 0;
    while (!nodes[static_cast<std::size_t>(k)].is_leaf()) {
      const auto& nd = nodes[static_cast<std::size_t>(k)];
      k = x(static_cast<std::size_t>(nd.feature)) <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(k)].value;
  }

  bool operator==(const Tree&) const = default;
};

}  // namespace fairworld
