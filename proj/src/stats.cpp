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

#include "rsim/stats.hpp"

namespace rsim {

InstClass classify(isa::Opcode op)
{
  using isa::Opcode;
  switch (op) {
  case Opcode::LdScalar:
  case Opcode::LdVec: return InstClass::Load;
  case Opcode::StVec: return InstClass::Store;
  case Opcode::SubVec8:
  case Opcode::Sdot:
  case Opcode::Mla:
  case Opcode::Mla8:
  case Opcode::VecAlu: return InstClass::VecCompute;
  case Opcode::CopyIndexed:
  case Opcode::ScalarAlu: return InstClass::IntAlu;
  case Opcode::Branch: return InstClass::Branch;
  case Opcode::Crs:
  case Opcode::Nop: return InstClass::Other;
  }
  return InstClass::Other;
}

std::string_view to_string(InstClass c)
{
  static constexpr std::array<std::string_view, kInstClasses> names{"load", "store", "vec", "int", "branch", "other"};
  return names[static_cast<std::size_t>(c)];
}

namespace {

template <class S, class F>
void for_each_counter(S& s, F&& f)
{
  f("cycles", s.cycles);
  f("fetched", s.fetched);
  f("decoded", s.decoded);
  f("renamed", s.renamed);
  f("icache_accesses", s.icache_accesses);
  f("dispatched", s.dispatched);
  f("issued", s.issued);
  f("committed", s.committed);
  f("committed_frontend", s.committed_by_origin[0]);
  f("committed_sensor", s.committed_by_origin[1]);
  f("int_alu_ops", s.int_alu_ops);
  f("vec_fu_ops", s.vec_fu_ops);
  f("rf_reads", s.rf_reads);
  f("rf_writes", s.rf_writes);
  f("branches", s.branches);
  f("mispredicts", s.mispredicts);
  f("squashed", s.squashed);
  f("squash_cycles", s.squash_cycles);
  f("l1d_accesses", s.l1d_accesses);
  f("l1d_misses", s.l1d_misses);
  f("l2_accesses", s.l2_accesses);
  f("dram_accesses", s.dram_accesses);
  f("l1i_misses", s.l1i_misses);
  f("l2_inst_accesses", s.l2_inst_accesses);
  f("dram_inst_accesses", s.dram_inst_accesses);
  f("l2_prefetches", s.l2_prefetches);
  f("dram_prefetch_accesses", s.dram_prefetch_accesses);
  f("store_forwards", s.store_forwards);
  f("sensor_activations", s.sensor_activations);
  f("generated", s.generated);
  f("generated_weight_loads", s.generated_weight_loads);
  f("generated_mla8", s.generated_mla8);
  f("overflow_split_extra", s.overflow_split_extra);
  f("skipped_weight_loads", s.skipped_weight_loads);
  f("skipped_computes", s.skipped_computes);
  f("param_loads", s.param_loads);
  f("drain_cycles", s.drain_cycles);
  f("restore_cycles", s.restore_cycles);
  f("sensor_operating_cycles", s.sensor_operating_cycles);
  f("sensor_stall_delta", s.sensor_stall_delta);
  f("sensor_stall_resources", s.sensor_stall_resources);
  f("scratchpad_accesses", s.scratchpad_accesses);
  f("rollbacks", s.rollbacks);
  f("stall_rob", s.stall_rob);
  f("stall_iq", s.stall_iq);
  f("stall_lq", s.stall_lq);
  f("stall_sq", s.stall_sq);
  f("stall_int_regs", s.stall_int_regs);
  f("stall_vec_regs", s.stall_vec_regs);
}

} // namespace

SimStats& SimStats::operator+=(const SimStats& o)
{
  auto flat = flatten(o);
  std::size_t i = 0;
  for_each_counter(*this, [&](const char*, uint64_t& v) { v += flat[i++].second; });
  for (std::size_t org = 0; org < 2; ++org)
    for (std::size_t c = 0; c < kInstClasses; ++c)
      committed_by_class[org][c] += o.committed_by_class[org][c];
  return *this;
}

std::vector<std::pair<std::string, uint64_t>> flatten(const SimStats& s)
{
  std::vector<std::pair<std::string, uint64_t>> out;
  for_each_counter(s, [&](const char* name, const uint64_t& v) { out.emplace_back(name, v); });
  for (std::size_t org = 0; org < 2; ++org)
    for (std::size_t c = 0; c < kInstClasses; ++c)
      out.emplace_back(std::string(org == 0 ? "committed_frontend_" : "committed_sensor_") +
                           std::string(to_string(static_cast<InstClass>(c))),
                       s.committed_by_class[org][c]);
  return out;
}

nlohmann::json to_json(const SimStats& s)
{
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : flatten(s))
    j[k] = v;
  return j;
}

} // namespace rsim
