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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "rsim/tensors.hpp"

namespace rsim {

using Vec4i32 = std::array<int32_t, 4>;
using Vec8i16 = std::array<int16_t, 8>;
using Vec16i8 = std::array<int8_t, 16>;
using Vec16i32 = std::array<int32_t, 16>;

// Instruction semantics. All accumulation wraps in two's complement.

/// acc[n] (+/-)= sum_m src2[4n+m] * sub[m]
void sdot_op(Vec4i32& acc, const Vec16i8& src2, std::span<const int8_t, 4> sub, bool subtract = false);
/// acc[j] += src2[j] * scalar, wrapping at 16 bits.
void mla_op(Vec8i16& acc, const Vec8i16& src2, int16_t scalar);
/// acc[j] += weights[j] * scalar; 16 int32 accumulators spread over 4 registers.
void mla8_op(Vec16i32& acc, const Vec16i8& weights, int8_t scalar);

/// Up to three int8 parts whose sum equals an out-of-range delta.
struct DeltaSplit
{
  std::array<int8_t, 3> parts{};
  std::size_t count = 0;

  std::span<const int8_t> view() const { return {parts.data(), count}; }
};

/// Split a delta outside [-128, 127] (|delta| <= 255) into int8 parts:
/// d1 = 127 * sign(delta), d2 = delta - d1, except +255 -> (127, 127, 1).
DeltaSplit split_overflow(int16_t delta16);

enum class KernelVariant : uint8_t { SdotBasic, SdotReuse, MlaBasic, MlaReuse, SensorBasic, SensorReuse };

std::string_view to_string(KernelVariant v);
std::optional<KernelVariant> parse_variant(std::string_view name);
bool is_reuse(KernelVariant v);
bool is_sensor(KernelVariant v);

/// Instruction-level counters. Loads and stores count vector instructions,
/// computes count sdot / mla / mla8 units (one per skippable unit of work).
struct OpCounts
{
  uint64_t weight_loads_skipped = 0;
  uint64_t computes_skipped = 0;
  uint64_t weight_loads_done = 0;
  uint64_t computes_done = 0;
  uint64_t delta_subs = 0;
  uint64_t input_loads = 0;
  uint64_t prev_loads = 0;
  uint64_t output_stores = 0;
  uint64_t prev_output_loads = 0;       // previous outputs or partial sums
  uint64_t overflow_extra_computes = 0; // extra instructions emitted for overflowing deltas

  bool operator==(const OpCounts&) const = default;
};

struct KernelResult
{
  AccumTensor output;
  OpCounts op_counts;
};

struct KernelOptions
{
  /// Output groups of 16 lanes processed together by the sensor kernels.
  std::size_t tile_groups = 1;
};

/// Runs one kernel variant functionally. `weights` is row-major
/// [input_len x output_len]; prev state is required for the Reuse variants.
KernelResult run_kernel(KernelVariant variant, const LayerSpec& layer, const QuantTensor& inputs,
                        const QuantTensor& weights, const QuantTensor* prev_inputs = nullptr,
                        const AccumTensor* prev_output = nullptr, const KernelOptions& options = {});

/// Plain int32 vector-matrix product used to stage previous outputs.
AccumTensor matvec(const QuantTensor& inputs, const QuantTensor& weights);

} // namespace rsim
