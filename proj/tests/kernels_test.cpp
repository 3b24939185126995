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

#include <doctest.h>

#include <random>

#include "rsim/kernels.hpp"
#include "rsim/similarity.hpp"
#include "test_util.hpp"

using namespace rsim;
using namespace rsim::testing;

TEST_CASE("sdot_op")
{
  SUBCASE("unit selector picks the first element of each group")
  {
    Vec4i32 acc{};
    Vec16i8 src2{};
    for (int i = 0; i < 16; ++i)
      src2[i] = static_cast<int8_t>(10 + i);
    const int8_t sub[4] = {1, 0, 0, 0};
    sdot_op(acc, src2, std::span<const int8_t, 4>(sub));
    CHECK(acc == Vec4i32{10, 14, 18, 22});
  }
  SUBCASE("zero sub-vector leaves the accumulators alone")
  {
    Vec4i32 acc{1, -2, 3, -4};
    Vec16i8 src2;
    src2.fill(99);
    const int8_t sub[4] = {0, 0, 0, 0};
    sdot_op(acc, src2, std::span<const int8_t, 4>(sub));
    CHECK(acc == Vec4i32{1, -2, 3, -4});
  }
  SUBCASE("random operands against a 4x4 MAC")
  {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 1000; ++t) {
      Vec4i32 acc, ref;
      Vec16i8 src2;
      int8_t sub[4];
      for (auto& a : acc)
        a = static_cast<int32_t>(rng());
      for (auto& v : src2)
        v = static_cast<int8_t>(rng());
      for (auto& v : sub)
        v = static_cast<int8_t>(rng());
      const bool minus = rng() % 2;
      ref = acc;
      for (int n = 0; n < 4; ++n) {
        int64_t s = 0;
        for (int m = 0; m < 4; ++m)
          s += src2[4 * n + m] * sub[m];
        ref[n] = wrap_add32(ref[n], minus ? -s : s);
      }
      sdot_op(acc, src2, std::span<const int8_t, 4>(sub), minus);
      CHECK(acc == ref);
    }
  }
}

TEST_CASE("mla_op")
{
  Vec8i16 acc{1, 2, 3, 4, 5, 6, 7, 8}, w{9, -9, 9, -9, 100, 0, -1, 1};
  Vec8i16 a0 = acc;
  mla_op(a0, w, 0);
  CHECK(a0 == acc);
  Vec8i16 a1 = acc;
  mla_op(a1, w, 1);
  for (int j = 0; j < 8; ++j)
    CHECK(a1[j] == acc[j] + w[j]);

  Vec8i16 wrap{};
  wrap[0] = 30000;
  Vec8i16 src{};
  src[0] = 1000;
  mla_op(wrap, src, 40);
  CHECK(wrap[0] == static_cast<int16_t>(static_cast<uint16_t>((30000 + 1000 * 40) & 0xFFFF)));
}

TEST_CASE("mla8_op")
{
  Vec16i32 acc{};
  Vec16i8 w;
  for (int i = 0; i < 16; ++i)
    w[i] = static_cast<int8_t>(i * 17 - 128);
  Vec16i32 a = acc;
  mla8_op(a, w, 0);
  CHECK(a == acc);
  mla8_op(a, w, 1);
  for (int i = 0; i < 16; ++i)
    CHECK(a[i] == w[i]);

  std::mt19937_64 rng(2);
  for (int t = 0; t < 10000; ++t) {
    Vec16i32 x;
    for (auto& v : x)
      v = static_cast<int32_t>(rng());
    for (auto& v : w)
      v = static_cast<int8_t>(rng());
    const auto s = static_cast<int8_t>(rng());
    Vec16i32 ref = x;
    for (int i = 0; i < 16; ++i)
      ref[i] = wrap_add32(ref[i], int64_t(w[i]) * s);
    mla8_op(x, w, s);
    CHECK(x == ref);
  }
}

TEST_CASE("split_overflow")
{
  auto parts = [](int16_t d) {
    const auto s = split_overflow(d);
    return std::vector<int>(s.view().begin(), s.view().end());
  };
  CHECK(parts(-200) == std::vector<int>{-127, -73});
  CHECK(parts(200) == std::vector<int>{127, 73});
  CHECK(parts(255) == std::vector<int>{127, 127, 1});
  CHECK(parts(-255) == std::vector<int>{-127, -128});
  CHECK(parts(128) == std::vector<int>{127, 1});
  CHECK(parts(-129) == std::vector<int>{-127, -2});
  for (int d = -255; d <= 255; ++d) {
    if (d >= -128 && d <= 127)
      continue;
    int sum = 0;
    for (int p : parts(static_cast<int16_t>(d)))
      sum += p;
    CHECK(sum == d);
  }
}

TEST_CASE("every variant equals the reference product")
{
  std::mt19937_64 rng(3);
  for (std::size_t n = 0; n < 200; ++n) {
    const RandomLayer rl = random_layer(rng, 96, n);
    const Workload w = generate(rl.spec);
    const AccumTensor expect = reference_dot(w.inputs, w.weights);
    const AccumTensor prev_out = reference_dot(w.prev_inputs, w.weights);
    CHECK(matvec(w.inputs, w.weights) == expect);
    for (KernelVariant v : kAllVariants)
      for (std::size_t tile = 1; tile <= (is_sensor(v) ? 3u : 1u); ++tile) {
        KernelOptions o;
        o.tile_groups = tile;
        const auto r = run_kernel(v, bare_layer(rl.spec, v, rl.dataflow), w.inputs, w.weights, &w.prev_inputs,
                                  &prev_out, o);
        INFO(to_string(v), " layer ", n, " tile ", tile);
        CHECK(r.output == expect);
      }
  }
}

TEST_CASE("skip rules")
{
  std::mt19937_64 rng(4);
  for (std::size_t n = 0; n < 100; ++n) {
    const RandomLayer rl = random_layer(rng, 128, n);
    const Workload w = generate(rl.spec);
    const AccumTensor prev_out = matvec(w.prev_inputs, w.weights);
    auto counts = [&](KernelVariant v, const QuantTensor& x) {
      return run_kernel(v, bare_layer(rl.spec, v, rl.dataflow), x, w.weights, &w.prev_inputs, &prev_out).op_counts;
    };
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < w.inputs.size(); ++i)
      zeros += w.inputs[i] == w.prev_inputs[i];
    const double zero_frac = double(zeros) / double(w.inputs.size());

    const OpCounts mla = counts(KernelVariant::MlaReuse, w.inputs);
    const OpCounts sen = counts(KernelVariant::SensorReuse, w.inputs);
    const OpCounts sd = counts(KernelVariant::SdotReuse, w.inputs);
    const auto frac = [](const OpCounts& c) {
      return double(c.computes_skipped) / double(c.computes_skipped + c.computes_done);
    };
    // padding lanes (always zero delta) are counted by mla/sdot, not by the sensor
    CHECK(frac(sen) == doctest::Approx(zero_frac).epsilon(1e-12));
    const std::size_t padded = pad16(w.inputs.size());
    const double padded_zero = double(zeros + padded - w.inputs.size()) / double(padded);
    const std::size_t mla_padded = ceil_div(w.inputs.size(), 8) * 8;
    CHECK(frac(mla) == doctest::Approx(double(zeros + mla_padded - w.inputs.size()) / double(mla_padded)));
    CHECK(frac(sd) <= padded_zero + 1e-12);

    // total work does not depend on the inputs
    const OpCounts basic_mla = counts(KernelVariant::MlaBasic, w.inputs);
    CHECK(mla.computes_done + mla.computes_skipped == basic_mla.computes_done);
    const OpCounts sen_same = counts(KernelVariant::SensorReuse, w.prev_inputs);
    CHECK(sen_same.computes_done == 0);
    CHECK(sen_same.weight_loads_done == 0);
    CHECK(sen.computes_done + sen.computes_skipped == sen_same.computes_skipped);
    CHECK(sd.computes_done + sd.computes_skipped == counts(KernelVariant::SdotReuse, w.prev_inputs).computes_skipped);
  }
}

TEST_CASE("sdot reuse equals mla reuse only when zeros come in aligned quads")
{
  LayerSpec l;
  l.input_len = 32;
  l.output_len = 16;
  l.kernel_mode = KernelMode::Reuse;
  QuantTensor w(32, 16);
  for (auto& v : w.data())
    v = 3;
  std::vector<int8_t> prev(32, 5), aligned(32, 5), scattered(32, 5);
  for (int i = 0; i < 8; ++i)
    aligned[i] = 9; // quads 0 and 1 changed
  for (int i = 0; i < 32; i += 4)
    scattered[i] = 9; // one lane in every quad
  const QuantTensor xp = QuantTensor::vector(prev);
  const AccumTensor po = matvec(xp, w);
  auto frac = [&](KernelVariant v, const std::vector<int8_t>& x) {
    const auto c = run_kernel(v, l, QuantTensor::vector(x), w, &xp, &po).op_counts;
    return double(c.computes_skipped) / double(c.computes_skipped + c.computes_done);
  };
  CHECK(frac(KernelVariant::SdotReuse, aligned) == frac(KernelVariant::MlaReuse, aligned));
  CHECK(frac(KernelVariant::SdotReuse, scattered) == 0.0);
  CHECK(frac(KernelVariant::MlaReuse, scattered) == 0.75);
}

TEST_CASE("run_kernel preconditions")
{
  LayerSpec l;
  l.input_len = 4;
  l.output_len = 4;
  const QuantTensor x = QuantTensor::vector({1, 2, 3, 4});
  const QuantTensor w(4, 4);
  CHECK_THROWS_AS(run_kernel(KernelVariant::SdotReuse, l, x, w), Error);
  CHECK_THROWS_AS(run_kernel(KernelVariant::SdotBasic, l, x, QuantTensor(3, 4)), Error);
  CHECK_THROWS_AS(run_kernel(KernelVariant::SdotBasic, l, QuantTensor::vector({1}), w), Error);
  CHECK(parse_variant("sensor-reuse") == KernelVariant::SensorReuse);
  CHECK_FALSE(parse_variant("nope").has_value());
}
