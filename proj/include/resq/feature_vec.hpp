#pragma once

#include <cstdint>
#include <vector>

namespace resq {

// Sparse feature vector. Encoded states are mostly zero padding, so replay
// storage and the first network layer work on the non-zero entries only.
struct FeatureVec {
  std::int32_t dim = 0;
  std::vector<std::int32_t> idx;  // strictly ascending
  std::vector<float> val;         // non-zero entries

  void push(std::int32_t i, double v) {
    if (v != 0.0) {
      idx.push_back(i);
      val.push_back(static_cast<float>(v));
    }
  }

  std::size_t nnz() const { return idx.size(); }

  std::vector<double> to_dense() const {
    std::vector<double> dense(static_cast<std::size_t>(dim), 0.0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      dense[static_cast<std::size_t>(idx[i])] = static_cast<double>(val[i]);
    }
    return dense;
  }

  bool operator==(const FeatureVec&) const = default;
};

}  // namespace resq
