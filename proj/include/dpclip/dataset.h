// Copyright 2026 The dpclip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef DPCLIP_DATASET_H_
#define DPCLIP_DATASET_H_

#include <cstdint>
#include <vector>

#include "dpclip/common.h"

namespace dpclip {

// One labeled record with a sparse feature vector. Indices are 0-based and
// strictly increasing.
struct SparseExample {
  std::vector<int32_t> indices;
  std::vector<double> values;
  double label = 0.0;

  // Largest index + 1, or 0 for an empty feature list.
  int32_t RequiredDim() const {
    return indices.empty() ? 0 : indices.back() + 1;
  }

  // <x, features>. Caller guarantees RequiredDim() <= x.size().
  double Dot(const Vector& x) const {
    double s = 0.0;
    for (size_t i = 0; i < indices.size(); ++i) s += values[i] * x[indices[i]];
    return s;
  }

  // out += scale * features.
  void AddTo(double scale, Vector& out) const {
    for (size_t i = 0; i < indices.size(); ++i)
      out[indices[i]] += scale * values[i];
  }

  friend bool operator==(const SparseExample&, const SparseExample&) = default;
};

// An immutable-after-load collection of examples. `dim` is at least the
// largest feature index + 1 over all examples.
struct Dataset {
  std::vector<SparseExample> examples;
  int32_t dim = 0;

  int64_t size() const { return static_cast<int64_t>(examples.size()); }
  bool empty() const { return examples.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace dpclip

#endif  // DPCLIP_DATASET_H_
