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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rsim/config.hpp"
#include "rsim/kernels.hpp"
#include "rsim/machine.hpp"
#include "rsim/pipeline.hpp"
#include "rsim/tensors.hpp"

namespace rsim {

/// Value range of generated activations. Relu draws from [0, 127], as after
/// a rectifier; Signed uses the whole int8 range.
enum class ValueRange : uint8_t { Relu, Signed };

struct SyntheticSpec
{
  std::size_t input_len = 0;
  std::size_t output_len = 0;
  double similarity = 0.0;     // fraction of identical positions
  double zero_fraction = 0.5;  // share of the identical positions that are zero in both frames
  uint64_t seed = 1;
  ValueRange range = ValueRange::Relu;

  void validate() const;
};

struct Workload
{
  QuantTensor prev_inputs; // 1 x input_len
  QuantTensor inputs;      // 1 x input_len
  QuantTensor weights;     // input_len x output_len, row major
};

/// Number of identical positions the generator places: round(similarity * n).
std::size_t identical_count(double similarity, std::size_t n);
/// Number of those that are zero in both frames.
std::size_t zero_identical_count(double similarity, double zero_fraction, std::size_t n);

/// Exact-count construction: the identical positions are chosen by a seeded
/// shuffle, every other position is guaranteed to differ.
Workload generate(const SyntheticSpec& spec);

/// Frame sequence with a fixed identical fraction between consecutive frames.
std::vector<QuantTensor> generate_frames(const SyntheticSpec& spec, std::size_t frames);

// -- dumps --

/// Directory layout:
///   manifest.json   {"name", "input_len", "output_len", "dtype": "i8", "frame_count", "dataflow": "os"|"is"}
///   weights.bin     input_len * output_len int8, row major
///   inputs_<k>.bin  input_len int8, k = 0 .. frame_count-1
struct LayerDump
{
  std::string name;
  std::size_t input_len = 0;
  std::size_t output_len = 0;
  Dataflow dataflow = Dataflow::OutputStationary;
  QuantTensor weights;
  std::vector<QuantTensor> frames;
};

void write_dump(const LayerDump& dump, const std::filesystem::path& dir);
/// Throws Error on a malformed manifest or payload sizes that disagree with it.
LayerDump read_dump(const std::filesystem::path& dir);
/// A single dump directory, or a directory whose subdirectories are dumps
/// (sorted by name).
std::vector<LayerDump> read_dumps(const std::filesystem::path& path);

// -- staging --

/// Fixed memory map: the parameter block, then inputs, previous inputs,
/// outputs and weights, each region 4 KiB aligned.
struct MemoryLayout
{
  uint64_t param_addr = 0;
  LayerSpec layer;
  std::size_t image_bytes = 0;
};

MemoryLayout plan_layout(std::size_t input_len, std::size_t output_len, KernelMode mode, Dataflow dataflow);

struct StageTensors
{
  const QuantTensor* inputs = nullptr;
  const QuantTensor* prev_inputs = nullptr;  // required for Reuse
  const QuantTensor* weights = nullptr;      // row major
  const AccumTensor* prev_output = nullptr;  // required for Reuse
};

/// Writes the parameter block and tensors. Weights are converted to the
/// layout `weight_layout` names. Throws Error on overlapping or out-of-image
/// regions and on tensors that do not fit the layer.
void stage(MemoryImage& mem, const MemoryLayout& layout, Layout weight_layout, const StageTensors& t);

QuantTensor read_inputs(const MemoryImage& mem, uint64_t addr, std::size_t len);
AccumTensor read_outputs(const MemoryImage& mem, const LayerSpec& layer);

/// A layer evaluated over a stream of frames. Reuse variants carry the
/// previous inputs and outputs from one evaluation to the next.
class EvaluationSession
{
public:
  /// Stages the first frame as "previous" with its output precomputed, so the
  /// first evaluated frame already has history.
  EvaluationSession(KernelVariant variant, Dataflow dataflow, const QuantTensor& weights, const QuantTensor& first_frame);
  EvaluationSession(const EvaluationSession&) = delete;
  EvaluationSession& operator=(const EvaluationSession&) = delete;

  /// prev_inputs <- inputs, prev_output <- output, inputs <- frame.
  /// Throws Error while an evaluation is in flight or on a shape mismatch.
  void advance_evaluation(const QuantTensor& frame);

  /// Starts the pipeline on the current frame. Step with core().
  Core& begin(const MachineConfig& cfg, RunOptions options = {});
  /// Finishes the in-flight evaluation and returns its stats.
  SimStats finish();
  /// begin + run + finish.
  SimStats evaluate(const MachineConfig& cfg, RunOptions options = {});

  bool in_flight() const { return core_.has_value(); }
  Core& core() { return *core_; }

  KernelVariant variant() const { return variant_; }
  const MemoryLayout& layout() const { return layout_; }
  const MemoryImage& memory() const { return mem_; }
  const QuantTensor& inputs() const { return inputs_; }
  AccumTensor output() const { return read_outputs(mem_, layout_.layer); }

private:
  KernelVariant variant_;
  MemoryLayout layout_;
  MemoryImage mem_;
  isa::Program program_;
  QuantTensor inputs_;
  std::optional<Core> core_;
  bool evaluated_ = false;
};

} // namespace rsim
