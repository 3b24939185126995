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

#include "rsim/programs.hpp"

namespace rsim {

using namespace isa;

namespace {

constexpr uint8_t kCounterBlocks = 4;
constexpr uint8_t kCounterChunks = 5;

Reg acc(std::size_t j) { return z(static_cast<uint8_t>(10 + j)); }

void loop_tail(Program& p, uint8_t counter, std::size_t target)
{
  p.emit(add_imm(x(counter), x(counter), -1));
  p.emit(branch(fn::kNez, x(counter), static_cast<int64_t>(target)));
}

// Output-block outer loop, 16-input chunk inner loop; 16 packed weight
// vectors and 16 sdot per chunk.
Program sdot_basic(const LayerSpec& l)
{
  Program p;
  const auto blocks = static_cast<int64_t>(ceil_div(l.output_len, 16));
  const auto chunks = static_cast<int64_t>(ceil_div(l.input_len, 16));
  p.emit(mov_imm(x(2), static_cast<int64_t>(l.weight_addr)));
  p.emit(mov_imm(x(3), static_cast<int64_t>(l.output_addr)));
  p.emit(mov_imm(x(kCounterBlocks), blocks));
  const std::size_t block_loop = p.emit(vzero({acc(0), acc(1), acc(2), acc(3)}));
  p.emit(mov_imm(x(kCounterChunks), chunks));
  p.emit(mov_imm(x(8), static_cast<int64_t>(l.input_addr)));
  const std::size_t chunk_loop = p.emit(ld_vec(z(0), x(8), 0));
  for (uint8_t r = 0; r < 16; ++r)
    p.emit(ld_vec(z(16 + r), x(2), 16 * r));
  for (uint8_t k = 0; k < 4; ++k)
    for (uint8_t j = 0; j < 4; ++j)
      p.emit(sdot(acc(j), z(16 + 4 * k + j), z(0), k));
  p.emit(add_imm(x(8), x(8), 16));
  p.emit(add_imm(x(2), x(2), 256));
  loop_tail(p, kCounterChunks, chunk_loop);
  for (uint8_t j = 0; j < 4; ++j)
    p.emit(st_vec(acc(j), x(3), 16 * j));
  p.emit(add_imm(x(3), x(3), 64));
  loop_tail(p, kCounterBlocks, block_loop);
  return p;
}

// Software reuse on the sdot kernel: one delta vector per chunk, a branch per
// 4-lane sub-vector, and an out-of-line exact path for chunks whose delta
// overflowed int8.
Program sdot_reuse(const LayerSpec& l)
{
  Program p;
  const auto blocks = static_cast<int64_t>(ceil_div(l.output_len, 16));
  const auto chunks = static_cast<int64_t>(ceil_div(l.input_len, 16));
  const auto prev_off = static_cast<int64_t>(l.prev_input_addr - l.input_addr);
  p.emit(mov_imm(x(2), static_cast<int64_t>(l.weight_addr)));
  p.emit(mov_imm(x(3), static_cast<int64_t>(l.output_addr)));
  p.emit(mov_imm(x(kCounterBlocks), blocks));
  const std::size_t block_loop = p.emit(ld_vec(acc(0), x(3), 0));
  for (uint8_t j = 1; j < 4; ++j)
    p.emit(ld_vec(acc(j), x(3), 16 * j));
  p.emit(mov_imm(x(kCounterChunks), chunks));
  p.emit(mov_imm(x(8), static_cast<int64_t>(l.input_addr)));
  const std::size_t chunk_loop = p.emit(ld_vec(z(0), x(8), 0));
  p.emit(ld_vec(z(1), x(8), prev_off));
  p.emit(sub_vec8(z(2), z(0), z(1)));
  p.emit(copy_indexed(x(6), z(2), 0, fn::kFlags));
  const std::size_t to_slow = p.emit(branch(fn::kNez, x(6), 0));
  for (uint8_t k = 0; k < 4; ++k) {
    p.emit(copy_indexed(x(7), z(2), k, fn::kWord));
    const std::size_t skip = p.emit(branch(fn::kEqz, x(7), 0));
    for (uint8_t j = 0; j < 4; ++j) {
      p.emit(ld_vec(z(16 + 4 * k + j), x(2), 16 * (4 * k + j)));
      p.emit(sdot(acc(j), z(16 + 4 * k + j), z(2), k));
    }
    p.code[skip].imm = static_cast<int64_t>(p.size());
  }
  const std::size_t join = p.emit(add_imm(x(8), x(8), 16));
  p.emit(add_imm(x(2), x(2), 256));
  loop_tail(p, kCounterChunks, chunk_loop);
  for (uint8_t j = 0; j < 4; ++j)
    p.emit(st_vec(acc(j), x(3), 16 * j));
  p.emit(add_imm(x(3), x(3), 64));
  loop_tail(p, kCounterBlocks, block_loop);
  const std::size_t exit = p.emit(branch(fn::kAlways, {}, 0));

  // exact path: acc += w.curr - w.prev
  p.code[to_slow].imm = static_cast<int64_t>(p.size());
  for (uint8_t k = 0; k < 4; ++k)
    for (uint8_t j = 0; j < 4; ++j) {
      p.emit(ld_vec(z(16 + 4 * k + j), x(2), 16 * (4 * k + j)));
      p.emit(sdot(acc(j), z(16 + 4 * k + j), z(0), k));
      p.emit(sdot(acc(j), z(16 + 4 * k + j), z(1), k, true));
    }
  p.emit(branch(fn::kAlways, {}, static_cast<int64_t>(join)));
  p.code[exit].imm = static_cast<int64_t>(p.size());
  return p;
}

// int16 mla on 8-output halves of each 16-output group. The products are
// exact in 16 bits (|w| <= 128, |x| <= 255) and widened into int32 sums.
Program mla_kernel(const LayerSpec& l, bool reuse)
{
  Program p;
  const auto groups = static_cast<int64_t>(ceil_div(l.output_len, 16));
  const auto chunks = static_cast<int64_t>(ceil_div(l.input_len, 16));
  const auto row = static_cast<int64_t>(pad16(l.output_len));
  const auto prev_off = static_cast<int64_t>(l.prev_input_addr - l.input_addr);
  const Reg zero = z(31);

  p.emit(vzero({zero}));
  p.emit(mov_imm(x(9), static_cast<int64_t>(l.weight_addr)));
  p.emit(mov_imm(x(3), static_cast<int64_t>(l.output_addr)));
  p.emit(mov_imm(x(kCounterBlocks), groups));
  std::size_t group_loop;
  if (reuse) {
    group_loop = p.emit(ld_vec(acc(0), x(3), 0));
    for (uint8_t j = 1; j < 4; ++j)
      p.emit(ld_vec(acc(j), x(3), 16 * j));
  } else {
    group_loop = p.emit(vzero({acc(0), acc(1), acc(2), acc(3)}));
  }
  p.emit(mov_imm(x(kCounterChunks), chunks));
  p.emit(mov_imm(x(8), static_cast<int64_t>(l.input_addr)));
  p.emit(add_imm(x(2), x(9), 0));
  std::size_t chunk_loop = 0;
  uint8_t rot = 0;
  for (uint8_t half_in = 0; half_in < 2; ++half_in) {
    const std::size_t first = p.emit(ld_vec(z(0), x(8), 8 * half_in, fn::kWiden8));
    if (half_in == 0)
      chunk_loop = first;
    Reg src = z(0);
    if (reuse) {
      p.emit(ld_vec(z(1), x(8), prev_off + 8 * half_in, fn::kWiden8));
      p.emit(vsub_i16(z(2), z(0), z(1)));
      src = z(2);
    }
    for (uint8_t k = 0; k < 8; ++k) {
      const int64_t lane = 8 * half_in + k;
      p.emit(copy_indexed(x(7), src, k, fn::kHalf));
      std::size_t skip = 0;
      if (reuse)
        skip = p.emit(branch(fn::kEqz, x(7), 0));
      for (uint8_t h = 0; h < 2; ++h, ++rot) {
        const Reg w = z(static_cast<uint8_t>(16 + rot % 8));
        const Reg prod = z(static_cast<uint8_t>(24 + rot % 6));
        p.emit(ld_vec(w, x(2), lane * row + 8 * h, fn::kWiden8));
        p.emit(mla(prod, zero, w, x(7)));
        p.emit(vadd_widen(acc(2 * h), acc(2 * h + 1), prod));
      }
      if (reuse)
        p.code[skip].imm = static_cast<int64_t>(p.size());
    }
  }
  p.emit(add_imm(x(8), x(8), 16));
  p.emit(add_imm(x(2), x(2), 16 * row));
  loop_tail(p, kCounterChunks, chunk_loop);
  for (uint8_t j = 0; j < 4; ++j)
    p.emit(st_vec(acc(j), x(3), 16 * j));
  p.emit(add_imm(x(3), x(3), 64));
  p.emit(add_imm(x(9), x(9), 16));
  loop_tail(p, kCounterBlocks, group_loop);
  return p;
}

} // namespace

Layout weight_layout(KernelVariant v)
{
  return v == KernelVariant::SdotBasic || v == KernelVariant::SdotReuse ? Layout::SdotPacked
                                                                        : Layout::WeightInterleaved16;
}

Program build_program(KernelVariant v, const LayerSpec& layer, uint64_t param_addr)
{
  if (layer.input_len == 0 || layer.output_len == 0) {
    if (!is_sensor(v))
      return {};
  }
  switch (v) {
  case KernelVariant::SdotBasic: return sdot_basic(layer);
  case KernelVariant::SdotReuse: return sdot_reuse(layer);
  case KernelVariant::MlaBasic: return mla_kernel(layer, false);
  case KernelVariant::MlaReuse: return mla_kernel(layer, true);
  case KernelVariant::SensorBasic:
  case KernelVariant::SensorReuse: {
    Program p;
    p.emit(mov_imm(x(1), static_cast<int64_t>(param_addr)));
    p.emit(crs(x(1)));
    return p;
  }
  }
  return {};
}

} // namespace rsim
