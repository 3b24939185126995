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
#include <optional>
#include <ostream>

#include "rsim/branch.hpp"
#include "rsim/cache.hpp"
#include "rsim/config.hpp"
#include "rsim/machine.hpp"
#include "rsim/sensor.hpp"
#include "rsim/stats.hpp"

namespace rsim {

struct RunOptions
{
  /// Index (in generation order, counting kernel instructions only) from
  /// which the first generated load or store is forced to fail once at
  /// commit, as a memory-ordering misspeculation would.
  std::optional<uint64_t> inject_fault_at;

  /// Per-cycle occupancy trace, one line per cycle:
  ///   <cycle> fq=<n> dq=<n> rob=<n> iq=<n> lq=<n> sq=<n> commit=<n> sensor=<phase> path=<ok|wrong>
  std::ostream* trace = nullptr;
};

/// Cycle-stepped out-of-order core executing a static program, with the
/// ReuseSensor attached at decode/dispatch. Values are real: every
/// instruction computes its results when it issues, and an in-order
/// interpreter running at fetch provides branch outcomes and the reference
/// final state.
class Core
{
public:
  Core(const MachineConfig& cfg, const isa::Program& program, MemoryImage memory, RunOptions options = {});

  /// Runs to completion. Throws SimulationFault on a committed bad access,
  /// a nested CRS or a structural deadlock.
  SimStats run();

  uint64_t arch_int(std::size_t i) const { return ints_.arch_value(i); }
  const isa::VecValue& arch_vec(std::size_t i) const { return vecs_.arch_value(i); }
  const MemoryImage& memory() const { return mem_; }
  const Interpreter& oracle() const { return oracle_; }
  const IntBank& int_bank() const { return ints_; }
  const VecBank& vec_bank() const { return vecs_; }
  const SensorState& sensor() const { return sensor_; }
  const SimStats& stats() const { return stats_; }

  /// Runs `cycles` cycles (or until done); returns true when the program has finished.
  bool step(uint64_t cycles = 1);

private:
  struct DynInst
  {
    isa::Instruction in;
    uint64_t pc = 0;
    bool wrong_path = false;
    uint64_t fetch_cycle = 0;
    uint64_t decode_cycle = 0;

    bool predicted_taken = false;
    bool mispredict = false;
    bool taken = false; // true outcome, correct path only

    std::array<int16_t, 4> pdst{kNoPhys, kNoPhys, kNoPhys, kNoPhys};
    std::array<int16_t, 4> old_pdst{kNoPhys, kNoPhys, kNoPhys, kNoPhys};
    std::array<int16_t, 3> psrc{kNoPhys, kNoPhys, kNoPhys};

    bool issued = false;
    bool completed = false;
    uint64_t ready_cycle = 0;

    uint64_t addr = 0;
    bool mem_fault = false;
    bool inject_fault = false;
    isa::VecValue store_data;
    uint64_t prefetch_key = 0;
    bool delta_sub = false;
    isa::VecValue result; // first destination value, kept for delta delivery
  };

  enum class Fu : uint8_t { None, Int, Vec, Load, Store };
  static Fu fu_of(isa::Opcode op);

  bool finished() const;
  void cycle();
  void fetch();
  void decode();
  void rename_dispatch();
  void issue();
  void complete();
  void commit();
  void sensor_tick();

  bool can_dispatch(const isa::Instruction& in);
  DynInst& dispatch(DynInst d);
  void rename(DynInst& d);
  bool operands_ready(const DynInst& d) const;
  enum class LoadCheck { Wait, Memory, Forward };
  LoadCheck check_load(std::size_t idx, isa::VecValue& fwd) const;
  void execute(DynInst& d, bool forwarded, const isa::VecValue& fwd);
  void squash_from(uint64_t seq);
  void release_dsts(DynInst& d);
  void commit_crs();
  void finish_sensor();
  void trace_line(std::size_t commits);

  MachineConfig cfg_;
  const isa::Program* program_;
  MemoryImage mem_;
  RunOptions opts_;
  Interpreter oracle_;
  MemoryHierarchy caches_;
  BranchPredictor bp_;
  IntBank ints_;
  VecBank vecs_;
  SensorState sensor_;
  SimStats stats_;

  std::deque<DynInst> fq_;
  std::deque<DynInst> dq_;
  std::deque<DynInst> rob_;
  std::size_t iq_count_ = 0;
  std::size_t lq_count_ = 0;
  std::size_t sq_count_ = 0;

  uint64_t now_ = 0;
  uint64_t next_seq_ = 1;
  uint64_t fetch_resume_ = 0;
  bool wrong_path_ = false;
  uint64_t wp_pc_ = 0;
  bool decode_blocked_ = false;
  uint64_t last_progress_ = 0;
  uint64_t kernel_dispatched_ = 0;
  bool fault_injected_ = false;
};

/// Convenience wrapper: run a program and return the core for inspection.
SimStats simulate(const MachineConfig& cfg, const isa::Program& program, MemoryImage& memory,
                  const RunOptions& options = {});

} // namespace rsim
