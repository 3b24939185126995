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
#include <vector>

#include "rsim/isa.hpp"

namespace rsim {

/// Flat little-endian byte-addressable memory.
class MemoryImage
{
public:
  MemoryImage() = default;
  explicit MemoryImage(std::size_t bytes) : bytes_(bytes, 0) {}

  std::size_t size() const { return bytes_.size(); }
  bool contains(uint64_t addr, std::size_t len) const { return addr <= bytes_.size() && len <= bytes_.size() - addr; }

  // Out-of-range accesses raise SimulationFault.
  void read(uint64_t addr, std::span<uint8_t> out) const;
  void write(uint64_t addr, std::span<const uint8_t> in);

  uint64_t read_u64(uint64_t addr) const;
  void write_u64(uint64_t addr, uint64_t v);
  int32_t read_i32(uint64_t addr) const;
  void write_i32(uint64_t addr, int32_t v);

  std::span<const uint8_t> bytes() const { return bytes_; }
  bool operator==(const MemoryImage&) const = default;

private:
  std::vector<uint8_t> bytes_;
};

enum class PhysState : uint8_t { Free, Pending, Ready };

inline constexpr int16_t kNoPhys = -1;

/// One physical register file with its rename map and free list. Values are
/// stored per physical register; timing fields are owned by the pipeline.
template <class Value>
class RegBank
{
public:
  RegBank(std::size_t phys, std::size_t arch)
      : values_(phys), state_(phys, PhysState::Free), ready_(phys, 0), acc_ready_(phys, 0), map_(arch, kNoPhys)
  {
    if (phys < arch)
      throw Error("RegBank: fewer physical than architectural registers");
    for (std::size_t a = 0; a < arch; ++a) {
      map_[a] = static_cast<int16_t>(a);
      state_[a] = PhysState::Ready;
    }
    for (std::size_t p = phys; p-- > arch;)
      free_.push_back(static_cast<int16_t>(p));
  }

  std::size_t phys_size() const { return values_.size(); }
  std::size_t arch_size() const { return map_.size(); }

  int16_t map(std::size_t arch) const { return map_.at(arch); }
  void set_map(std::size_t arch, int16_t p) { map_.at(arch) = p; }

  std::optional<int16_t> allocate()
  {
    if (free_.empty())
      return std::nullopt;
    const int16_t p = free_.back();
    free_.pop_back();
    state_[p] = PhysState::Pending;
    ready_[p] = acc_ready_[p] = UINT64_MAX;
    return p;
  }

  void release(int16_t p)
  {
    if (p == kNoPhys)
      return;
    if (state_[p] == PhysState::Free)
      throw Error("RegBank: double release of a physical register");
    state_[p] = PhysState::Free;
    free_.push_back(p);
  }

  std::size_t free_count() const { return free_.size(); }
  PhysState state(int16_t p) const { return state_[p]; }
  void set_state(int16_t p, PhysState s) { state_[p] = s; }

  /// Counts per state; Free must equal the free-list length.
  std::array<std::size_t, 3> census() const
  {
    std::array<std::size_t, 3> c{};
    for (auto s : state_)
      ++c[static_cast<std::size_t>(s)];
    return c;
  }

  Value& value(int16_t p) { return values_[p]; }
  const Value& value(int16_t p) const { return values_[p]; }
  uint64_t& ready_cycle(int16_t p) { return ready_[p]; }
  uint64_t& acc_ready_cycle(int16_t p) { return acc_ready_[p]; }
  uint64_t ready_cycle(int16_t p) const { return ready_[p]; }
  uint64_t acc_ready_cycle(int16_t p) const { return acc_ready_[p]; }

  /// Architectural view: value of the register currently mapped to `arch`.
  const Value& arch_value(std::size_t arch) const { return values_.at(map_.at(arch)); }

  struct Snapshot
  {
    std::vector<Value> values;
    std::vector<PhysState> state;
    std::vector<int16_t> map;
    std::vector<int16_t> free;
  };

  Snapshot snapshot() const { return {values_, state_, map_, free_}; }
  void restore(const Snapshot& s)
  {
    values_ = s.values;
    state_ = s.state;
    map_ = s.map;
    free_ = s.free;
    for (std::size_t p = 0; p < values_.size(); ++p)
      ready_[p] = acc_ready_[p] = 0;
  }

  /// Return every physical register to the free list and unmap all
  /// architectural registers.
  void clear_all()
  {
    std::fill(map_.begin(), map_.end(), kNoPhys);
    std::fill(state_.begin(), state_.end(), PhysState::Free);
    free_.clear();
    for (std::size_t p = values_.size(); p-- > 0;)
      free_.push_back(static_cast<int16_t>(p));
  }

private:
  std::vector<Value> values_;
  std::vector<PhysState> state_;
  std::vector<uint64_t> ready_;
  std::vector<uint64_t> acc_ready_;
  std::vector<int16_t> map_;
  std::vector<int16_t> free_;
};

using IntBank = RegBank<uint64_t>;
using VecBank = RegBank<isa::VecValue>;

/// Scratchpad copy of the vector register file taken before the ReuseSensor
/// takes over all vector physical registers.
class VecSnapshot
{
public:
  bool valid() const { return saved_.has_value(); }
  std::size_t bytes() const { return saved_ ? saved_->values.size() * kVecBytes : 0; }

  void take(const VecBank& bank);
  /// Throws Error when there is nothing to restore (including a second restore).
  void restore_into(VecBank& bank);

private:
  std::optional<VecBank::Snapshot> saved_;
};

/// Executes a CRS functionally against memory: reads the parameter block at
/// `param_addr` and writes the kernel outputs. The reference semantics for
/// what the ReuseSensor must produce.
void execute_crs(MemoryImage& mem, uint64_t param_addr);

/// In-order functional interpreter; the oracle the pipeline is checked against
/// and the source of true branch outcomes at fetch.
class Interpreter
{
public:
  Interpreter(const isa::Program& program, MemoryImage memory);

  struct Step
  {
    uint64_t pc = 0;
    uint64_t next_pc = 0;
    bool taken = false;
  };

  bool done() const { return pc_ >= program_->size(); }
  uint64_t pc() const { return pc_; }
  /// Executes the instruction at pc. Throws SimulationFault on a bad address.
  Step step();
  /// Runs to completion; throws Error after `max_steps`.
  uint64_t run(uint64_t max_steps = 100'000'000);

  uint64_t int_reg(std::size_t i) const { return ints_.at(i); }
  const isa::VecValue& vec_reg(std::size_t i) const { return vecs_.at(i); }
  const MemoryImage& memory() const { return mem_; }

private:
  const isa::Program* program_;
  MemoryImage mem_;
  std::array<uint64_t, isa::kArchIntRegs> ints_{};
  std::array<isa::VecValue, isa::kArchVecRegs> vecs_{};
  uint64_t pc_ = 0;
};

} // namespace rsim
