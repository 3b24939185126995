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
#include <string>

#include <json.hpp>

namespace rsim {

struct CacheConfig
{
  std::size_t size_bytes = 64 * 1024;
  std::size_t ways = 4;
  std::size_t line_bytes = 64;

  std::size_t sets() const { return size_bytes / (ways * line_bytes); }
};

enum class PredictorKind : uint8_t { Bimodal, Oracle, AlwaysWrong, AlwaysNotTaken };

/// Machine parameters. Widths, queue sizes, register files and cache
/// geometries default to a 4-wide mobile out-of-order core; latencies and the
/// predictor are our own choices and are labelled as such in reports.
struct MachineConfig
{
  // front end
  std::size_t fetch_width = 4;
  std::size_t decode_width = 4;
  std::size_t rename_width = 4;
  std::size_t commit_width = 4;
  std::size_t fetch_queue = 16;
  std::size_t decode_queue = 16;

  // back end
  std::size_t issue_width = 8;
  std::size_t dispatch_width = 8;
  std::size_t writeback_width = 8;
  std::size_t rob_entries = 128;
  std::size_t iq_entries = 80;
  std::size_t lq_entries = 32;
  std::size_t sq_entries = 48;
  std::size_t int_alus = 2;
  std::size_t vec_fus = 2;
  std::size_t load_ports = 2;
  std::size_t store_ports = 1;

  // register files
  std::size_t int_phys_regs = 128;
  std::size_t fp_phys_regs = 192; // present for completeness; no FP instructions
  std::size_t vec_phys_regs = 48;

  // execution latencies (cycles)
  uint32_t int_alu_latency = 1;
  uint32_t vec_alu_latency = 1;
  uint32_t vec_mac_latency = 3;
  bool mac_accumulator_forwarding = true;

  // memory hierarchy
  CacheConfig l1i{64 * 1024, 4, 64};
  CacheConfig l1d{64 * 1024, 4, 64};
  CacheConfig l2{256 * 1024, 8, 64};
  uint32_t l1_latency = 4;
  uint32_t l2_latency = 12;
  uint32_t dram_latency = 100;
  bool prefetcher = true;
  std::size_t prefetch_degree = 2;
  std::size_t prefetch_distance = 16; // strides ahead of the triggering access
  std::size_t prefetch_table = 64;

  // branch prediction
  PredictorKind predictor = PredictorKind::Bimodal;
  std::size_t predictor_entries = 1024;
  uint32_t mispredict_penalty = 14;

  // ReuseSensor
  std::size_t sensor_gen_width = 4;
  std::size_t sensor_tile_groups = 1;
  std::size_t sensor_tags_per_class = 1;
  uint32_t sensor_restore_cycles = 1;
  bool delta_ready_at_commit = true;

  // simulation guards
  uint64_t deadlock_cycles = 200'000;

  /// Throws Error when a width or capacity is zero or a cache geometry is inconsistent.
  void validate() const;
};

void to_json(nlohmann::json& j, const MachineConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, MachineConfig& c);

MachineConfig load_config(const std::string& path);

std::string to_string(PredictorKind k);
PredictorKind parse_predictor(const std::string& s);

} // namespace rsim
