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

#include "rsim/kernels.hpp"

#include <algorithm>
#include <string>

namespace rsim {

void sdot_op(Vec4i32& acc, const Vec16i8& src2, std::span<const int8_t, 4> sub, bool subtract)
{
  for (std::size_t n = 0; n < 4; ++n) {
    int64_t dot = 0;
    for (std::size_t m = 0; m < 4; ++m)
      dot += static_cast<int64_t>(src2[4 * n + m]) * sub[m];
    acc[n] = wrap_add32(acc[n], subtract ? -dot : dot);
  }
}

void mla_op(Vec8i16& acc, const Vec8i16& src2, int16_t scalar)
{
  for (std::size_t j = 0; j < 8; ++j)
    acc[j] = wrap_add16(acc[j], static_cast<int32_t>(src2[j]) * scalar);
}

void mla8_op(Vec16i32& acc, const Vec16i8& weights, int8_t scalar)
{
  for (std::size_t j = 0; j < 16; ++j)
    acc[j] = wrap_add32(acc[j], static_cast<int32_t>(weights[j]) * scalar);
}

DeltaSplit split_overflow(int16_t delta16)
{
  if (delta16 >= -128 && delta16 <= 127)
    throw Error("split_overflow: delta " + std::to_string(delta16) + " is in int8 range");
  if (delta16 < -255 || delta16 > 255)
    throw Error("split_overflow: delta " + std::to_string(delta16) + " exceeds int8 difference range");
  DeltaSplit s;
  if (delta16 == 255) {
    s.parts = {127, 127, 1};
    s.count = 3;
    return s;
  }
  const int8_t d1 = delta16 > 0 ? 127 : -127;
  s.parts = {d1, static_cast<int8_t>(delta16 - d1), 0};
  s.count = 2;
  return s;
}

std::string_view to_string(KernelVariant v)
{
  switch (v) {
  case KernelVariant::SdotBasic: return "sdot-basic";
  case KernelVariant::SdotReuse: return "sdot-reuse";
  case KernelVariant::MlaBasic: return "mla-basic";
  case KernelVariant::MlaReuse: return "mla-reuse";
  case KernelVariant::SensorBasic: return "sensor-basic";
  case KernelVariant::SensorReuse: return "sensor-reuse";
  }
  return "?";
}

std::optional<KernelVariant> parse_variant(std::string_view name)
{
  for (auto v : {KernelVariant::SdotBasic, KernelVariant::SdotReuse, KernelVariant::MlaBasic, KernelVariant::MlaReuse,
                 KernelVariant::SensorBasic, KernelVariant::SensorReuse})
    if (to_string(v) == name)
      return v;
  return std::nullopt;
}

bool is_reuse(KernelVariant v)
{
  return v == KernelVariant::SdotReuse || v == KernelVariant::MlaReuse || v == KernelVariant::SensorReuse;
}

bool is_sensor(KernelVariant v) { return v == KernelVariant::SensorBasic || v == KernelVariant::SensorReuse; }

AccumTensor matvec(const QuantTensor& inputs, const QuantTensor& weights)
{
  if (inputs.size() != weights.rows())
    throw Error("matvec: dimension mismatch");
  AccumTensor out(weights.cols());
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    const int32_t x = inputs[i];
    for (std::size_t o = 0; o < weights.cols(); ++o)
      out.data[o] = wrap_add32(out.data[o], x * weights.at(i, o));
  }
  return out;
}

namespace {

struct Operands
{
  const LayerSpec& layer;
  const QuantTensor& x;
  const QuantTensor& w;
  const QuantTensor* prev;
  const AccumTensor* prev_out;

  std::size_t in() const { return layer.input_len; }
  std::size_t out() const { return layer.output_len; }

  int8_t input(std::size_t i) const { return i < in() ? x[i] : 0; }
  int8_t prev_input(std::size_t i) const { return i < in() ? (*prev)[i] : 0; }
  int16_t delta(std::size_t i) const { return static_cast<int16_t>(input(i) - prev_input(i)); }
  int8_t weight(std::size_t i, std::size_t o) const { return i < in() && o < out() ? w.at(i, o) : 0; }
  int32_t initial_output(std::size_t o) const { return prev_out && o < out() ? prev_out->data[o] : 0; }
};

// Blocks of 16 outputs held in four sdot accumulators.
KernelResult run_sdot(const Operands& ops, bool reuse)
{
  KernelResult r;
  auto& c = r.op_counts;
  const std::size_t blocks = ceil_div(ops.out(), 16);
  const std::size_t chunks = ceil_div(ops.in(), 16);
  r.output = AccumTensor(ops.out());

  for (std::size_t b = 0; b < blocks; ++b) {
    std::array<Vec4i32, 4> acc{};
    if (reuse) {
      for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t n = 0; n < 4; ++n)
          acc[j][n] = ops.initial_output(16 * b + 4 * j + n);
      c.prev_output_loads += 4;
    }
    for (std::size_t ch = 0; ch < chunks; ++ch) {
      Vec16i8 curr{}, prev{}, d8{};
      bool overflow = false;
      for (std::size_t l = 0; l < 16; ++l)
        curr[l] = ops.input(16 * ch + l);
      ++c.input_loads;
      if (reuse) {
        for (std::size_t l = 0; l < 16; ++l) {
          prev[l] = ops.prev_input(16 * ch + l);
          const int16_t d = static_cast<int16_t>(curr[l] - prev[l]);
          overflow = overflow || d < -128 || d > 127;
          d8[l] = static_cast<int8_t>(d);
        }
        ++c.prev_loads;
        ++c.delta_subs;
      }
      for (std::size_t k = 0; k < 4; ++k) {
        if (reuse) {
          const bool all_zero = std::all_of(d8.begin() + 4 * k, d8.begin() + 4 * k + 4, [](int8_t v) { return v == 0; });
          if (all_zero) {
            c.weight_loads_skipped += 4;
            c.computes_skipped += 4;
            continue;
          }
        }
        for (std::size_t j = 0; j < 4; ++j) {
          Vec16i8 wv{};
          for (std::size_t n = 0; n < 4; ++n)
            for (std::size_t m = 0; m < 4; ++m)
              wv[4 * n + m] = ops.weight(16 * ch + 4 * k + m, 16 * b + 4 * j + n);
          ++c.weight_loads_done;
          ++c.computes_done;
          if (!reuse) {
            sdot_op(acc[j], wv, std::span<const int8_t, 4>(curr.data() + 4 * k, 4));
          } else if (!overflow) {
            sdot_op(acc[j], wv, std::span<const int8_t, 4>(d8.data() + 4 * k, 4));
          } else {
            // Exact route when a lane's delta does not fit in int8.
            sdot_op(acc[j], wv, std::span<const int8_t, 4>(curr.data() + 4 * k, 4));
            sdot_op(acc[j], wv, std::span<const int8_t, 4>(prev.data() + 4 * k, 4), true);
            ++c.overflow_extra_computes;
          }
        }
      }
    }
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t n = 0; n < 4; ++n)
        if (16 * b + 4 * j + n < ops.out())
          r.output.data[16 * b + 4 * j + n] = acc[j][n];
    c.output_stores += 4;
  }
  return r;
}

// int16 mla on 8-output halves, widened into int32 sums.
KernelResult run_mla(const Operands& ops, bool reuse)
{
  KernelResult r;
  auto& c = r.op_counts;
  const std::size_t blocks = ceil_div(ops.out(), 16);
  const std::size_t chunks = ceil_div(ops.in(), 8);
  r.output = AccumTensor(ops.out());

  for (std::size_t b = 0; b < blocks; ++b) {
    std::array<int32_t, 16> acc{};
    if (reuse) {
      for (std::size_t l = 0; l < 16; ++l)
        acc[l] = ops.initial_output(16 * b + l);
      c.prev_output_loads += 4;
    }
    for (std::size_t ch = 0; ch < chunks; ++ch) {
      ++c.input_loads;
      if (reuse) {
        ++c.prev_loads;
        ++c.delta_subs;
      }
      for (std::size_t k = 0; k < 8; ++k) {
        const std::size_t i = 8 * ch + k;
        const int16_t scalar = reuse ? ops.delta(i) : ops.input(i);
        if (reuse && scalar == 0) {
          c.weight_loads_skipped += 2;
          c.computes_skipped += 2;
          continue;
        }
        for (std::size_t h = 0; h < 2; ++h) {
          Vec8i16 wv{};
          for (std::size_t l = 0; l < 8; ++l)
            wv[l] = ops.weight(i, 16 * b + 8 * h + l);
          ++c.weight_loads_done;
          ++c.computes_done;
          Vec8i16 prod{};
          mla_op(prod, wv, scalar);
          for (std::size_t l = 0; l < 8; ++l)
            acc[8 * h + l] = wrap_add32(acc[8 * h + l], prod[l]);
        }
      }
    }
    for (std::size_t l = 0; l < 16; ++l)
      if (16 * b + l < ops.out())
        r.output.data[16 * b + l] = acc[l];
    c.output_stores += 4;
  }
  return r;
}

// mla8 over 16-lane output groups, tiled `tile` groups at a time.
class SensorKernel
{
public:
  SensorKernel(const Operands& ops, bool reuse, std::size_t tile)
      : ops_(ops), reuse_(reuse), tile_(std::max<std::size_t>(tile, 1)), groups_(ceil_div(ops.out(), 16)),
        chunks_(ceil_div(ops.in(), 16)), acc_(groups_)
  {
    for (std::size_t g = 0; g < groups_; ++g)
      for (std::size_t l = 0; l < 16; ++l)
        acc_[g][l] = reuse_ ? ops_.initial_output(16 * g + l) : 0;
  }

  KernelResult run()
  {
    if (ops_.layer.dataflow == Dataflow::OutputStationary)
      output_stationary();
    else
      input_stationary();
    KernelResult r;
    r.op_counts = c_;
    r.output = AccumTensor(ops_.out());
    for (std::size_t o = 0; o < ops_.out(); ++o)
      r.output.data[o] = acc_[o / 16][o % 16];
    return r;
  }

private:
  std::size_t lanes_in(std::size_t chunk) const { return std::min<std::size_t>(16, ops_.in() - 16 * chunk); }

  void load_chunk()
  {
    ++c_.input_loads;
    if (reuse_) {
      ++c_.prev_loads;
      ++c_.delta_subs;
    }
  }

  void lane(std::size_t i, std::size_t g0, std::size_t g1)
  {
    const std::size_t n = g1 - g0;
    if (reuse_ && ops_.delta(i) == 0) {
      c_.weight_loads_skipped += n;
      c_.computes_skipped += n;
      return;
    }
    for (std::size_t g = g0; g < g1; ++g) {
      Vec16i8 wv{};
      for (std::size_t l = 0; l < 16; ++l)
        wv[l] = ops_.weight(i, 16 * g + l);
      ++c_.weight_loads_done;
      ++c_.computes_done;
      if (!reuse_) {
        mla8_op(acc_[g], wv, ops_.input(i));
        continue;
      }
      const int16_t d = ops_.delta(i);
      if (d >= -128 && d <= 127) {
        mla8_op(acc_[g], wv, static_cast<int8_t>(d));
      } else {
        const auto split = split_overflow(d);
        for (int8_t part : split.view())
          mla8_op(acc_[g], wv, part);
        c_.overflow_extra_computes += split.count - 1;
      }
    }
  }

  void output_stationary()
  {
    for (std::size_t g0 = 0; g0 < groups_; g0 += tile_) {
      const std::size_t g1 = std::min(groups_, g0 + tile_);
      if (reuse_)
        c_.prev_output_loads += 4 * (g1 - g0);
      for (std::size_t ch = 0; ch < chunks_; ++ch) {
        load_chunk();
        for (std::size_t k = 0; k < lanes_in(ch); ++k)
          lane(16 * ch + k, g0, g1);
      }
      c_.output_stores += 4 * (g1 - g0);
    }
  }

  void input_stationary()
  {
    for (std::size_t ch = 0; ch < chunks_; ++ch) {
      load_chunk();
      if (reuse_) {
        bool any = false;
        for (std::size_t k = 0; k < lanes_in(ch); ++k)
          any = any || ops_.delta(16 * ch + k) != 0;
        if (!any) {
          c_.weight_loads_skipped += lanes_in(ch) * groups_;
          c_.computes_skipped += lanes_in(ch) * groups_;
          continue;
        }
      }
      for (std::size_t g0 = 0; g0 < groups_; g0 += tile_) {
        const std::size_t g1 = std::min(groups_, g0 + tile_);
        if (reuse_ || ch > 0)
          c_.prev_output_loads += 4 * (g1 - g0);
        for (std::size_t k = 0; k < lanes_in(ch); ++k)
          lane(16 * ch + k, g0, g1);
        c_.output_stores += 4 * (g1 - g0);
      }
    }
  }

  const Operands& ops_;
  bool reuse_;
  std::size_t tile_;
  std::size_t groups_;
  std::size_t chunks_;
  std::vector<Vec16i32> acc_;
  OpCounts c_;
};

} // namespace

KernelResult run_kernel(KernelVariant variant, const LayerSpec& layer, const QuantTensor& inputs,
                        const QuantTensor& weights, const QuantTensor* prev_inputs, const AccumTensor* prev_output,
                        const KernelOptions& options)
{
  if (layer.input_len < 1 || layer.output_len < 1)
    throw Error("run_kernel: empty layer");
  if (inputs.size() != layer.input_len)
    throw Error("run_kernel: input length mismatch");
  if (weights.layout() != Layout::RowMajor || weights.rows() != layer.input_len || weights.cols() != layer.output_len)
    throw Error("run_kernel: weights must be row-major [input_len x output_len]");
  const bool reuse = is_reuse(variant);
  if (reuse) {
    if (!prev_inputs || !prev_output)
      throw Error("run_kernel: reuse variants need previous inputs and outputs");
    if (prev_inputs->size() != layer.input_len || prev_output->length() != layer.output_len)
      throw Error("run_kernel: previous state dimension mismatch");
  }
  const Operands ops{layer, inputs, weights, reuse ? prev_inputs : nullptr, reuse ? prev_output : nullptr};

  switch (variant) {
  case KernelVariant::SdotBasic:
  case KernelVariant::SdotReuse: return run_sdot(ops, reuse);
  case KernelVariant::MlaBasic:
  case KernelVariant::MlaReuse: return run_mla(ops, reuse);
  case KernelVariant::SensorBasic:
  case KernelVariant::SensorReuse: return SensorKernel(ops, reuse, options.tile_groups).run();
  }
  throw Error("run_kernel: unknown variant");
}

} // namespace rsim
