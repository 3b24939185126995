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

#include "rsim/tensors.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <string>

namespace rsim {

QuantTensor::QuantTensor(std::size_t rows, std::size_t cols, Layout layout)
    : rows_(rows), cols_(cols), layout_(layout), data_(rows * cols, 0)
{
}

QuantTensor::QuantTensor(std::size_t rows, std::size_t cols, std::vector<int8_t> data, Layout layout)
    : rows_(rows), cols_(cols), layout_(layout), data_(std::move(data))
{
  if (data_.size() != rows_ * cols_)
    throw Error("QuantTensor: data length " + std::to_string(data_.size()) + " != " + std::to_string(rows_) + "x" +
                std::to_string(cols_));
  if (layout_ == Layout::WeightInterleaved16 && cols_ % 16 != 0)
    throw Error("QuantTensor: interleaved layout needs cols padded to 16");
}

QuantTensor QuantTensor::vector(std::vector<int8_t> data)
{
  const auto n = data.size();
  return QuantTensor(1, n, std::move(data));
}

void LayerSpec::validate() const
{
  if (input_len < 1 || output_len < 1)
    throw Error("LayerSpec: input_len and output_len must be >= 1");

  struct Range
  {
    uint64_t lo, hi;
    const char* name;
  };
  std::array<Range, 4> ranges{{
      {input_addr, input_addr + input_bytes(), "input"},
      {prev_input_addr, prev_input_addr + input_bytes(), "prev_input"},
      {weight_addr, weight_addr + weight_bytes(), "weight"},
      {output_addr, output_addr + output_bytes(), "output"},
  }};
  for (std::size_t a = 0; a < ranges.size(); ++a)
    for (std::size_t b = a + 1; b < ranges.size(); ++b)
      if (ranges[a].lo < ranges[b].hi && ranges[b].lo < ranges[a].hi)
        throw Error(std::string("LayerSpec: ") + ranges[a].name + " and " + ranges[b].name + " regions overlap");
}

std::vector<uint8_t> encode_param_block(const LayerSpec& layer)
{
  const std::array<uint64_t, 8> fields{layer.input_len,   layer.output_len,
                                       layer.input_addr,  layer.weight_addr,
                                       layer.output_addr, layer.prev_input_addr,
                                       static_cast<uint64_t>(layer.kernel_mode),
                                       static_cast<uint64_t>(layer.dataflow)};
  std::vector<uint8_t> out(kParamBlockBytes);
  for (std::size_t f = 0; f < fields.size(); ++f)
    for (std::size_t b = 0; b < 8; ++b)
      out[f * 8 + b] = static_cast<uint8_t>(fields[f] >> (8 * b));
  return out;
}

LayerSpec decode_param_block(std::span<const uint8_t> bytes)
{
  if (bytes.size() < kParamBlockBytes)
    throw Error("param block: need 64 bytes");
  std::array<uint64_t, 8> f{};
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t b = 0; b < 8; ++b)
      f[i] |= static_cast<uint64_t>(bytes[i * 8 + b]) << (8 * b);
  LayerSpec layer;
  layer.input_len = f[0];
  layer.output_len = f[1];
  layer.input_addr = f[2];
  layer.weight_addr = f[3];
  layer.output_addr = f[4];
  layer.prev_input_addr = f[5];
  layer.kernel_mode = f[6] ? KernelMode::Reuse : KernelMode::Basic;
  layer.dataflow = f[7] ? Dataflow::InputStationary : Dataflow::OutputStationary;
  return layer;
}

std::size_t interleaved_index(std::size_t i, std::size_t o, std::size_t output_len)
{
  const std::size_t group = o / 16;
  const std::size_t lane = o % 16;
  return i * pad16(output_len) + group * 16 + lane;
}

QuantTensor interleave_weights(const QuantTensor& w)
{
  if (w.layout() != Layout::RowMajor)
    throw Error("interleave_weights: expects a row-major tensor");
  const std::size_t in = w.rows(), out = w.cols();
  std::vector<int8_t> data(in * pad16(out), 0);
  for (std::size_t i = 0; i < in; ++i)
    for (std::size_t o = 0; o < out; ++o)
      data[interleaved_index(i, o, out)] = w.at(i, o);
  return QuantTensor(in, pad16(out), std::move(data), Layout::WeightInterleaved16);
}

QuantTensor deinterleave_weights(const QuantTensor& w, std::size_t output_len)
{
  if (w.layout() != Layout::WeightInterleaved16 || pad16(output_len) != w.cols())
    throw Error("deinterleave_weights: layout/width mismatch");
  QuantTensor out(w.rows(), output_len);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t o = 0; o < output_len; ++o)
      out.at(i, o) = w.data()[interleaved_index(i, o, output_len)];
  return out;
}

std::size_t sdot_packed_index(std::size_t i, std::size_t o, std::size_t input_len)
{
  const std::size_t chunks = ceil_div(input_len, 16);
  const std::size_t b = o / 16, c = i / 16;
  const std::size_t k = (i % 16) / 4, m = i % 4;
  const std::size_t j = (o % 16) / 4, n = o % 4;
  return ((b * chunks + c) * 16 + k * 4 + j) * 16 + 4 * n + m;
}

QuantTensor pack_sdot_weights(const QuantTensor& w)
{
  if (w.layout() != Layout::RowMajor)
    throw Error("pack_sdot_weights: expects a row-major tensor");
  const std::size_t in = w.rows(), out = w.cols();
  std::vector<int8_t> data(pad16(in) * pad16(out), 0);
  for (std::size_t i = 0; i < in; ++i)
    for (std::size_t o = 0; o < out; ++o)
      data[sdot_packed_index(i, o, in)] = w.at(i, o);
  return QuantTensor(pad16(in), pad16(out), std::move(data), Layout::SdotPacked);
}

std::vector<int16_t> delta(const QuantTensor& curr, const QuantTensor& prev)
{
  if (!curr.same_shape(prev))
    throw Error("delta: shape mismatch");
  std::vector<int16_t> d(curr.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = static_cast<int16_t>(curr[i] - prev[i]);
  return d;
}

} // namespace rsim
