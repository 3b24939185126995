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

#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "rsim/similarity.hpp"
#include "rsim/workloads.hpp"
#include "test_util.hpp"

using namespace rsim;
namespace fs = std::filesystem;

namespace {

struct TempDir
{
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("rsim_" + tag + "_" + std::to_string(std::random_device{}())))
  {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

LayerDump small_dump()
{
  SyntheticSpec s{20, 12, 0.5, 0.5, 21, ValueRange::Signed};
  LayerDump d;
  d.name = "fc";
  d.input_len = 20;
  d.output_len = 12;
  d.dataflow = Dataflow::InputStationary;
  d.weights = generate(s).weights;
  d.frames = generate_frames(s, 3);
  return d;
}

} // namespace

TEST_CASE("generator is deterministic per seed")
{
  const SyntheticSpec s{300, 40, 0.41, 0.5, 77, ValueRange::Signed};
  const Workload a = generate(s), b = generate(s);
  CHECK(a.inputs == b.inputs);
  CHECK(a.prev_inputs == b.prev_inputs);
  CHECK(a.weights == b.weights);
  SyntheticSpec other = s;
  other.seed = 78;
  CHECK(generate(other).inputs != a.inputs);
}

TEST_CASE("generator hits the requested similarity exactly")
{
  std::mt19937_64 rng(5);
  for (std::size_t n = 0; n < 200; ++n) {
    testing::RandomLayer rl = testing::random_layer(rng, 700, n);
    if (n % 10 == 0)
      rl.spec.similarity = n % 20 ? 1.0 : 0.0;
    const Workload w = generate(rl.spec);
    const SimilarityReport r = measure(w.inputs, w.prev_inputs);
    const double len = double(rl.spec.input_len);
    CHECK(std::abs(r.total - rl.spec.similarity) <= 1.0 / len + 1e-12);
    CHECK(std::size_t(std::lround(r.total * len)) == identical_count(rl.spec.similarity, rl.spec.input_len));
    CHECK(std::size_t(std::lround(r.zero_identical * len)) ==
          zero_identical_count(rl.spec.similarity, rl.spec.zero_fraction, rl.spec.input_len));
    for (std::size_t i = 0; i < w.inputs.size(); ++i)
      if (rl.spec.range == ValueRange::Relu) {
        CHECK(w.inputs[i] >= 0);
        CHECK(w.prev_inputs[i] >= 0);
      }
  }
  CHECK(identical_count(0.41, 4096) == 1679);
  CHECK(identical_count(1.0, 4096) == 4096);
  CHECK(identical_count(0.0, 4096) == 0);
}

TEST_CASE("generator rejects bad specs")
{
  CHECK_THROWS_AS(generate({0, 4, 0.5, 0.5, 1, ValueRange::Relu}), Error);
  CHECK_THROWS_AS(generate({4, 4, 1.5, 0.5, 1, ValueRange::Relu}), Error);
  CHECK_THROWS_AS(generate({4, 4, 0.5, -0.1, 1, ValueRange::Relu}), Error);
}

TEST_CASE("frame sequences keep the similarity between neighbours")
{
  const SyntheticSpec s{512, 8, 0.7, 0.4, 3, ValueRange::Relu};
  const auto frames = generate_frames(s, 6);
  REQUIRE(frames.size() == 6);
  for (const SimilarityReport& r : measure_stream(frames))
    CHECK(std::abs(r.total - 0.7) <= 1.0 / 512);
}

TEST_CASE("dump round trip")
{
  TempDir dir("dump");
  const LayerDump d = small_dump();
  write_dump(d, dir.path / "fc");
  const LayerDump back = read_dump(dir.path / "fc");
  CHECK(back.name == d.name);
  CHECK(back.input_len == d.input_len);
  CHECK(back.output_len == d.output_len);
  CHECK(back.dataflow == d.dataflow);
  CHECK(back.weights == d.weights);
  REQUIRE(back.frames.size() == d.frames.size());
  for (std::size_t k = 0; k < d.frames.size(); ++k)
    CHECK(back.frames[k] == d.frames[k]);

  // a parent directory lists its dumps by name
  LayerDump second = d;
  second.name = "conv";
  write_dump(second, dir.path / "a_conv");
  const auto all = read_dumps(dir.path);
  REQUIRE(all.size() == 2);
  CHECK(all[0].name == "conv");
  CHECK(read_dumps(dir.path / "fc").size() == 1);
}

TEST_CASE("malformed dumps are rejected")
{
  TempDir dir("bad");
  const LayerDump d = small_dump();
  const fs::path p = dir.path / "fc";
  write_dump(d, p);
  const nlohmann::json good = nlohmann::json::parse(std::ifstream(p / "manifest.json"));

  auto with = [&](const std::string& key, const nlohmann::json& value) {
    nlohmann::json j = good;
    if (value.is_null())
      j.erase(key);
    else
      j[key] = value;
    write_text(p / "manifest.json", j.dump());
    return p;
  };
  CHECK_THROWS_AS(read_dump(with("dtype", "i16")), Error);
  CHECK_THROWS_AS(read_dump(with("dataflow", "ws")), Error);
  CHECK_THROWS_AS(read_dump(with("input_len", 0)), Error);
  CHECK_THROWS_AS(read_dump(with("input_len", 21)), Error); // payload sizes disagree
  CHECK_THROWS_AS(read_dump(with("frame_count", 4)), Error);
  CHECK_THROWS_AS(read_dump(with("output_len", "twelve")), Error);
  CHECK_THROWS_AS(read_dump(with("name", nullptr)), Error);
  write_text(p / "manifest.json", "{ not json");
  CHECK_THROWS_AS(read_dump(p), Error);
  fs::remove(p / "manifest.json");
  CHECK_THROWS_AS(read_dump(p), Error);
  CHECK_THROWS_AS(read_dumps(dir.path / "missing"), Error);

  LayerDump shape = d;
  shape.frames[1] = QuantTensor::vector(std::vector<int8_t>(5, 1));
  CHECK_THROWS_AS(write_dump(shape, dir.path / "shape"), Error);
}

TEST_CASE("staging checks regions and shapes")
{
  const Workload w = generate({40, 24, 0.5, 0.5, 2, ValueRange::Relu});
  const AccumTensor prev = matvec(w.prev_inputs, w.weights);
  const MemoryLayout l = plan_layout(40, 24, KernelMode::Reuse, Dataflow::InputStationary);
  REQUIRE_NOTHROW(l.layer.validate());
  MemoryImage m(l.image_bytes);
  CHECK_NOTHROW(stage(m, l, Layout::WeightInterleaved16, {&w.inputs, &w.prev_inputs, &w.weights, &prev}));
  CHECK(read_inputs(m, l.layer.input_addr, 40) == w.inputs);
  CHECK(decode_param_block(std::span(m.bytes()).subspan(l.param_addr, kParamBlockBytes)) == l.layer);

  MemoryLayout overlap = l;
  overlap.param_addr = l.layer.input_addr + 8;
  CHECK_THROWS_AS(stage(m, overlap, Layout::WeightInterleaved16, {&w.inputs, &w.prev_inputs, &w.weights, &prev}),
                  Error);
  MemoryImage small(l.image_bytes / 2);
  CHECK_THROWS_AS(stage(small, l, Layout::WeightInterleaved16, {&w.inputs, &w.prev_inputs, &w.weights, &prev}),
                  Error);
  CHECK_THROWS_AS(stage(m, l, Layout::WeightInterleaved16, {&w.inputs, nullptr, &w.weights, nullptr}), Error);
  const QuantTensor short_in = QuantTensor::vector(std::vector<int8_t>(39, 0));
  CHECK_THROWS_AS(stage(m, l, Layout::WeightInterleaved16, {&short_in, &w.prev_inputs, &w.weights, &prev}), Error);
}

TEST_CASE("evaluation session lifecycle")
{
  const SyntheticSpec s{64, 32, 0.5, 0.5, 31, ValueRange::Relu};
  const Workload w = generate(s);
  const auto frames = generate_frames(s, 3);
  EvaluationSession sess(KernelVariant::SensorReuse, Dataflow::InputStationary, w.weights, frames[0]);

  CHECK_THROWS_AS(sess.advance_evaluation(QuantTensor::vector(std::vector<int8_t>(63, 0))), Error);
  CHECK_THROWS_AS(sess.finish(), Error);
  sess.advance_evaluation(frames[1]);
  CHECK_THROWS_AS(sess.advance_evaluation(frames[2]), Error); // not evaluated yet

  sess.begin(MachineConfig{});
  CHECK(sess.in_flight());
  CHECK_THROWS_AS(sess.advance_evaluation(frames[2]), Error);
  CHECK_THROWS_AS(sess.begin(MachineConfig{}), Error);
  sess.core().step(10);
  sess.finish();
  CHECK_FALSE(sess.in_flight());
  CHECK(sess.output().data == matvec(frames[1], w.weights).data);

  sess.advance_evaluation(frames[2]);
  const SimStats st = sess.evaluate(MachineConfig{});
  CHECK(sess.output().data == matvec(frames[2], w.weights).data);
  CHECK(st.skipped_computes > 0);
}

TEST_CASE("reuse beats basic on a similar frame, identical frames skip everything")
{
  const SyntheticSpec s{256, 128, 0.8, 0.5, 41, ValueRange::Relu};
  const Workload w = generate(s);
  auto run = [&](KernelVariant v, const QuantTensor& frame) {
    EvaluationSession sess(v, Dataflow::InputStationary, w.weights, w.prev_inputs);
    sess.advance_evaluation(frame);
    const SimStats st = sess.evaluate(MachineConfig{});
    CHECK(sess.output().data == matvec(frame, w.weights).data);
    return st;
  };
  const SimStats basic = run(KernelVariant::SensorBasic, w.inputs);
  const SimStats reuse = run(KernelVariant::SensorReuse, w.inputs);
  CHECK(reuse.cycles < basic.cycles);
  CHECK(reuse.generated < basic.generated);

  const SimStats same = run(KernelVariant::SensorReuse, w.prev_inputs);
  CHECK(same.generated_mla8 == 0);
  CHECK(same.generated_weight_loads == 0);
  CHECK(same.skipped_computes == 256 * 8);
}
