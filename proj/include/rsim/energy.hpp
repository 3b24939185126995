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

#include <json.hpp>

#include "rsim/stats.hpp"

namespace rsim {

/// Linear event-energy model. Costs are in arbitrary units, relative to one
/// integer ALU operation; they are not calibrated to any process node.
struct EnergyModel
{
  double icache_access = 6.0;
  double decode_op = 2.0;
  double rename_op = 2.0;
  double issue_op = 1.5;
  double int_alu = 1.0;
  double vec_fu = 4.0;
  double l1_access = 6.0;
  double l2_access = 20.0;
  double dram_access = 200.0;
  double rf_read = 0.5;
  double rf_write = 0.7;
  double scratchpad_access = 1.5;
  double sensor_gen_op = 1.0; // one generated instruction leaving the ReuseSensor
  double static_power_per_cycle = 10.0;

  /// Throws Error on a negative cost.
  void validate() const;
};

struct EnergyBreakdown
{
  double frontend = 0.0; // icache, decode, rename
  double backend = 0.0;  // issue, functional units, register file
  double memory = 0.0;   // L1D, L2, DRAM
  double sensor = 0.0;   // scratchpad, instruction generation
  double dynamic = 0.0;
  double static_energy = 0.0;
  double total = 0.0;
};

EnergyBreakdown energy_account(const SimStats& stats, const EnergyModel& model);

nlohmann::json to_json(const EnergyModel& m);
EnergyModel energy_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EnergyBreakdown& e);

} // namespace rsim
