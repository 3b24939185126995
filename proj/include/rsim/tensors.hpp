/*
 *    Copyright 2026 The rsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rsim/common.hpp"

namespace rsim {

enum class Layout : uint8_t {
  RowMajor,
  WeightInterleaved16, // [input][padded_out], one 16-byte run per (input, output group)
  SdotPacked,          // 16x16 blocks of 4x4 tiles, consumed by the sdot kernels
};

/// int8 tensor with a (rows, cols) shape. Vectors are 1 x n.
class QuantTensor
{
public:
  QuantTensor() = default;
  QuantTensor(std::size_t rows, std::size_t cols, Layout layout = Layout::RowMajor);
  QuantTensor(std::size_t rows, std::size_t cols, std::vector<int8_t> data, Layout layout = Layout::RowMajor);

  static QuantTensor vector(std::vector<int8_t> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  Layout layout() const { return layout_; }

  std::span<const int8_t> data() const { return data_; }
  std::span<int8_t> data() { return data_; }

  int8_t at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  int8_t& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  int8_t operator[](std::size_t i) const { return data_[i]; }

  bool same_shape(const QuantTensor& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }
  bool operator==(const QuantTensor&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Layout layout_ = Layout::RowMajor;
  std::vector<int8_t> data_;
};

/// int32 accumulators for one layer's outputs.
struct AccumTensor
{
  std::vector<int32_t> data;

  AccumTensor() = default;
  explicit AccumTensor(std::size_t length) : data(length, 0) {}
  explicit AccumTensor(std::vector<int32_t> values) : data(std::move(values)) {}

  std::size_t length() const { return data.size(); }
  bool operator==(const AccumTensor&) const = default;
};

enum class KernelMode : uint8_t { Basic = 0, Reuse = 1 };
enum class Dataflow : uint8_t { OutputStationary = 0, InputStationary = 1 };

/// One layer (or tile) evaluation: dimensions and where everything lives in
/// simulated memory. Doubles as the CRS kernel-parameter block.
struct LayerSpec
{
  uint64_t input_len = 0;
  uint64_t output_len = 0;
  uint64_t input_addr = 0;
  uint64_t weight_addr = 0;
  uint64_t output_addr = 0;
  uint64_t prev_input_addr = 0;
  KernelMode kernel_mode = KernelMode::Basic;
  Dataflow dataflow = Dataflow::OutputStationary;

  // Byte footprints of each region. Inputs are padded to 16 lanes, outputs
  // to 16 int32 lanes, weights to the larger of the two packed layouts.
  std::size_t input_bytes() const { return pad16(input_len); }
  std::size_t weight_bytes() const { return pad16(input_len) * pad16(output_len); }
  std::size_t output_bytes() const { return pad16(output_len) * sizeof(int32_t); }

  /// Throws Error on zero lengths or overlapping regions.
  void validate() const;

  bool operator==(const LayerSpec&) const = default;
};

inline constexpr std::size_t kParamBlockBytes = 8 * sizeof(uint64_t);

/// Little-endian 8 x u64 block in the order the ReuseSensor reads it.
std::vector<uint8_t> encode_param_block(const LayerSpec& layer);
LayerSpec decode_param_block(std::span<const uint8_t> bytes);

/// Row-major [input_len x output_len] -> WeightInterleaved16 (padded lanes are zero).
QuantTensor interleave_weights(const QuantTensor& w);
/// Inverse of interleave_weights; output_len is the unpadded column count.
QuantTensor deinterleave_weights(const QuantTensor& w, std::size_t output_len);
/// Linear position of w[i][o] inside the interleaved layout.
std::size_t interleaved_index(std::size_t i, std::size_t o, std::size_t output_len);

/// Row-major -> SdotPacked. For output block b (16 outputs), input chunk c
/// (16 inputs), sub-vector k and accumulator quad j, one 16-byte vector holds
/// byte 4n+m = w[16c + 4k + m][16b + 4j + n]. Out-of-range entries are zero.
QuantTensor pack_sdot_weights(const QuantTensor& w);
std::size_t sdot_packed_index(std::size_t i, std::size_t o, std::size_t input_len);

/// Elementwise curr - prev, exact in 16 bits.
std::vector<int16_t> delta(const QuantTensor& curr, const QuantTensor& prev);

} // namespace rsim
