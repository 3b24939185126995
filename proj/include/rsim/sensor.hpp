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
#include <deque>
#include <map>
#include <optional>
#include <string_view>

#include "rsim/isa.hpp"
#include "rsim/machine.hpp"
#include "rsim/tensors.hpp"

namespace rsim {

enum class SensorPhase : uint8_t { Idle, Preparing, GenerateParams, KernelGen, Finishing, Restoring };

std::string_view to_string(SensorPhase p);
/// Idle -> Preparing -> GenerateParams -> KernelGen -> Finishing -> Restoring -> Idle.
/// Preparing may also fall back to Idle when the CRS is squashed, and a
/// malformed parameter block skips straight from GenerateParams to Finishing,
/// and a rollback during Finishing re-enters KernelGen.
bool legal_transition(SensorPhase from, SensorPhase to);

// Integer operand slots of generated instructions. Slots 0..7 name the
// parameter registers (block order), slot 8 the CRS source register.
inline constexpr uint8_t kParamSlots = 8;
inline constexpr uint8_t kCrsBaseSlot = 8;
inline constexpr uint8_t kSlotInputAddr = 2;
inline constexpr uint8_t kSlotWeightAddr = 3;
inline constexpr uint8_t kSlotOutputAddr = 4;
inline constexpr uint8_t kSlotPrevAddr = 5;

/// True 16-bit delta of lane k, rebuilt from the wrapped int8 lane and its
/// overflow flag.
int16_t delta_lane(const isa::VecValue& v, std::size_t k);

struct GenCounters
{
  uint64_t emitted = 0;
  uint64_t weight_loads = 0;
  uint64_t mla8 = 0;
  uint64_t overflow_extra = 0; // Mla8 beyond one per (input, group)
  uint64_t skipped_weight_loads = 0;
  uint64_t skipped_computes = 0;
};

/// Kernel instruction generator for one CRS. A value type: the state history
/// table stores copies and rollback assigns one back.
class KernelGenerator
{
public:
  enum class Status : uint8_t { Emit, NeedDelta, Done };

  struct Next
  {
    Status status = Status::Done;
    isa::Instruction in;
    bool delta_sub = false; // the SubVec8 whose result later feeds `next`
    uint32_t slot = 0;      // stable id of the generating step, used as a prefetch key
  };

  KernelGenerator() = default;
  KernelGenerator(const LayerSpec& layer, std::size_t tile_groups, std::size_t tags_per_class);

  /// Produces the next instruction and advances. `delta` is the value of the
  /// most recent delta SubVec8, or null while it is not ready yet.
  Next next(const isa::VecValue* delta);

  bool done() const { return stage_ == Stage::Done; }
  const GenCounters& counters() const { return counters_; }

private:
  enum class Stage : uint8_t { TileBegin, AccInit, ChunkBegin, LoadPrev, Sub, ChunkCheck, LanesStart, Lanes, Store, Done };

  std::size_t lanes(std::size_t chunk) const;
  std::size_t tile_size() const;
  uint8_t tag(uint8_t cls, uint32_t rot) const;
  isa::Reg acc(std::size_t r) const { return isa::z(static_cast<uint8_t>(16 + r)); }
  Next emit(isa::Instruction in, uint32_t slot);
  void end_tile();

  LayerSpec layer_{};
  bool reuse_ = false;
  bool input_stationary_ = false;
  std::size_t tile_ = 1;
  std::size_t tags_ = 1;
  std::size_t groups_ = 0;
  std::size_t chunks_ = 0;
  std::size_t row_bytes_ = 0;

  Stage stage_ = Stage::Done;
  std::size_t g0_ = 0;
  std::size_t chunk_ = 0;
  std::size_t r_ = 0;
  std::size_t k_ = 0;
  std::size_t g_ = 0;
  std::size_t part_ = 0;
  uint32_t rot_ = 0;
  uint8_t in_tag_ = 0;
  uint8_t prev_tag_ = 0;
  uint8_t delta_tag_ = 0;
  uint8_t w_tag_ = 0;
  GenCounters counters_;
};

/// Architectural side of the ReuseSensor between CRS decode and restore.
/// Phase sequencing lives in the pipeline, which owns the resources.
struct SensorState
{
  struct HistoryEntry
  {
    uint64_t seq = 0;
    KernelGenerator gen;
    std::optional<uint64_t> awaited_delta;
    uint8_t params_known = 0;
  };

  SensorPhase phase = SensorPhase::Idle;
  uint64_t crs_seq = 0;
  uint64_t crs_decode_cycle = 0;
  uint64_t activation_cycle = 0;
  int16_t crs_base_phys = kNoPhys;

  std::array<int16_t, kParamSlots> param_phys{};
  std::array<uint64_t, kParamSlots> param_values{};
  uint8_t params_known = 0; // bit per slot
  std::size_t params_emitted = 0;
  LayerSpec layer{};

  KernelGenerator gen;
  std::optional<uint64_t> awaited_delta;            // seq of the SubVec8 feeding the generator
  std::map<uint64_t, isa::VecValue> deltas;         // delivered SubVec8 results by seq
  std::deque<HistoryEntry> history;                 // one entry per generated kernel instruction
  VecSnapshot scratchpad;
  uint64_t restore_done_cycle = 0;
  uint64_t last_generated_commit = 0;

  void set_phase(SensorPhase next);
  bool params_complete() const { return params_known == 0xFF; }
  const isa::VecValue* current_delta() const;
  /// State history rollback to the entry of `seq` (the faulting instruction).
  void rollback(uint64_t seq);
  /// Eviction of entries at commit.
  void on_commit(uint64_t seq);
  void reset();
};

} // namespace rsim
