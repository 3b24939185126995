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
#include <string>
#include <vector>

#include <json.hpp>

#include "rsim/isa.hpp"

namespace rsim {

enum class InstClass : uint8_t { Load, Store, VecCompute, IntAlu, Branch, Other };
inline constexpr std::size_t kInstClasses = 6;

InstClass classify(isa::Opcode op);
std::string_view to_string(InstClass c);

/// Counters of one simulation run.
struct SimStats
{
  uint64_t cycles = 0;

  // front end (wrong path included)
  uint64_t fetched = 0;
  uint64_t decoded = 0;
  uint64_t renamed = 0;
  uint64_t icache_accesses = 0;

  // back end
  uint64_t dispatched = 0;
  uint64_t issued = 0;
  uint64_t committed = 0;
  std::array<uint64_t, 2> committed_by_origin{};               // FrontEnd, Sensor
  std::array<std::array<uint64_t, kInstClasses>, 2> committed_by_class{};
  uint64_t int_alu_ops = 0;
  uint64_t vec_fu_ops = 0;
  uint64_t rf_reads = 0;
  uint64_t rf_writes = 0;

  // speculation
  uint64_t branches = 0;
  uint64_t mispredicts = 0;
  uint64_t squashed = 0;
  uint64_t squash_cycles = 0;

  // memory
  uint64_t l1d_accesses = 0;
  uint64_t l1d_misses = 0;
  uint64_t l2_accesses = 0;
  uint64_t dram_accesses = 0;
  uint64_t l1i_misses = 0;
  uint64_t l2_inst_accesses = 0;
  uint64_t dram_inst_accesses = 0;
  uint64_t l2_prefetches = 0;
  uint64_t dram_prefetch_accesses = 0;
  uint64_t store_forwards = 0;

  // ReuseSensor
  uint64_t sensor_activations = 0;
  uint64_t generated = 0;
  uint64_t generated_weight_loads = 0;
  uint64_t generated_mla8 = 0;
  uint64_t overflow_split_extra = 0;
  uint64_t skipped_weight_loads = 0;
  uint64_t skipped_computes = 0;
  uint64_t param_loads = 0;
  uint64_t drain_cycles = 0;
  uint64_t restore_cycles = 0;
  uint64_t sensor_operating_cycles = 0;
  uint64_t sensor_stall_delta = 0;
  uint64_t sensor_stall_resources = 0;
  uint64_t scratchpad_accesses = 0;
  uint64_t rollbacks = 0;

  // dispatch blocked, by the first resource found missing
  uint64_t stall_rob = 0;
  uint64_t stall_iq = 0;
  uint64_t stall_lq = 0;
  uint64_t stall_sq = 0;
  uint64_t stall_int_regs = 0;
  uint64_t stall_vec_regs = 0;

  uint64_t committed_class(InstClass c) const
  {
    return committed_by_class[0][static_cast<std::size_t>(c)] + committed_by_class[1][static_cast<std::size_t>(c)];
  }
  uint64_t committed_branches_by(isa::Origin o) const
  {
    return committed_by_class[static_cast<std::size_t>(o)][static_cast<std::size_t>(InstClass::Branch)];
  }

  SimStats& operator+=(const SimStats& o);
  bool operator==(const SimStats&) const = default;
};

nlohmann::json to_json(const SimStats& s);

/// Flat (name, value) view used for CSV columns; order is stable.
std::vector<std::pair<std::string, uint64_t>> flatten(const SimStats& s);

} // namespace rsim
