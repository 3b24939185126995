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

#include "rsim/energy.hpp"

namespace rsim {

namespace {

template <class M, class F>
void for_each_cost(M& m, F&& f)
{
  f("icache_access", m.icache_access);
  f("decode_op", m.decode_op);
  f("rename_op", m.rename_op);
  f("issue_op", m.issue_op);
  f("int_alu", m.int_alu);
  f("vec_fu", m.vec_fu);
  f("l1_access", m.l1_access);
  f("l2_access", m.l2_access);
  f("dram_access", m.dram_access);
  f("rf_read", m.rf_read);
  f("rf_write", m.rf_write);
  f("scratchpad_access", m.scratchpad_access);
  f("sensor_gen_op", m.sensor_gen_op);
  f("static_power_per_cycle", m.static_power_per_cycle);
}

double n(uint64_t v) { return static_cast<double>(v); }

} // namespace

void EnergyModel::validate() const
{
  for_each_cost(*this, [](const char* name, double v) {
    if (!(v >= 0.0))
      throw Error(std::string("EnergyModel: ") + name + " must be >= 0");
  });
}

EnergyBreakdown energy_account(const SimStats& s, const EnergyModel& m)
{
  EnergyBreakdown e;
  // Sensor-generated instructions skip fetch and decode but are still renamed.
  e.frontend = n(s.icache_accesses) * m.icache_access + n(s.decoded) * m.decode_op + n(s.dispatched) * m.rename_op;
  e.backend = n(s.issued) * m.issue_op + n(s.int_alu_ops) * m.int_alu + n(s.vec_fu_ops) * m.vec_fu +
              n(s.rf_reads) * m.rf_read + n(s.rf_writes) * m.rf_write;
  e.memory = n(s.l1d_accesses) * m.l1_access +
             n(s.l2_accesses + s.l2_inst_accesses + s.l2_prefetches) * m.l2_access +
             n(s.dram_accesses + s.dram_inst_accesses + s.dram_prefetch_accesses) * m.dram_access;
  e.sensor = n(s.scratchpad_accesses) * m.scratchpad_access + n(s.generated) * m.sensor_gen_op;
  e.dynamic = e.frontend + e.backend + e.memory + e.sensor;
  e.static_energy = n(s.cycles) * m.static_power_per_cycle;
  e.total = e.dynamic + e.static_energy;
  return e;
}

nlohmann::json to_json(const EnergyModel& m)
{
  nlohmann::json j = nlohmann::json::object();
  for_each_cost(m, [&](const char* name, double v) { j[name] = v; });
  return j;
}

EnergyModel energy_model_from_json(const nlohmann::json& j)
{
  EnergyModel m;
  if (!j.is_object())
    throw Error("EnergyModel: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for_each_cost(m, [&](const char* name, double& v) {
      if (key == name) {
        if (!value.is_number())
          throw Error("EnergyModel: " + key + " must be a number");
        v = value.get<double>();
        known = true;
      }
    });
    if (!known)
      throw Error("EnergyModel: unknown cost \"" + key + "\"");
  }
  m.validate();
  return m;
}

nlohmann::json to_json(const EnergyBreakdown& e)
{
  return {{"frontend", e.frontend}, {"backend", e.backend},          {"memory", e.memory}, {"sensor", e.sensor},
          {"dynamic", e.dynamic},   {"static", e.static_energy}, {"total", e.total}};
}

} // namespace rsim
