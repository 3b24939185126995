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

#include "rsim/config.hpp"

#include <fstream>
#include <type_traits>

#include "rsim/common.hpp"

namespace rsim {

using nlohmann::json;

namespace {

void cache_to_json(json& j, const CacheConfig& c)
{
  j = json{{"size_bytes", c.size_bytes}, {"ways", c.ways}, {"line_bytes", c.line_bytes}};
}

void cache_from_json(const json& j, CacheConfig& c)
{
  for (const auto& [k, v] : j.items()) {
    if (k == "size_bytes")
      c.size_bytes = v.get<std::size_t>();
    else if (k == "ways")
      c.ways = v.get<std::size_t>();
    else if (k == "line_bytes")
      c.line_bytes = v.get<std::size_t>();
    else
      throw Error("config: unknown cache key '" + k + "'");
  }
}

// Single table of scalar fields so reading and writing stay in sync.
template <class F>
void for_each_scalar(MachineConfig& c, F&& f)
{
  f("fetch_width", c.fetch_width);
  f("decode_width", c.decode_width);
  f("rename_width", c.rename_width);
  f("commit_width", c.commit_width);
  f("fetch_queue", c.fetch_queue);
  f("decode_queue", c.decode_queue);
  f("issue_width", c.issue_width);
  f("dispatch_width", c.dispatch_width);
  f("writeback_width", c.writeback_width);
  f("rob_entries", c.rob_entries);
  f("iq_entries", c.iq_entries);
  f("lq_entries", c.lq_entries);
  f("sq_entries", c.sq_entries);
  f("int_alus", c.int_alus);
  f("vec_fus", c.vec_fus);
  f("load_ports", c.load_ports);
  f("store_ports", c.store_ports);
  f("int_phys_regs", c.int_phys_regs);
  f("fp_phys_regs", c.fp_phys_regs);
  f("vec_phys_regs", c.vec_phys_regs);
  f("int_alu_latency", c.int_alu_latency);
  f("vec_alu_latency", c.vec_alu_latency);
  f("vec_mac_latency", c.vec_mac_latency);
  f("mac_accumulator_forwarding", c.mac_accumulator_forwarding);
  f("l1_latency", c.l1_latency);
  f("l2_latency", c.l2_latency);
  f("dram_latency", c.dram_latency);
  f("prefetcher", c.prefetcher);
  f("prefetch_degree", c.prefetch_degree);
  f("prefetch_distance", c.prefetch_distance);
  f("prefetch_table", c.prefetch_table);
  f("predictor_entries", c.predictor_entries);
  f("mispredict_penalty", c.mispredict_penalty);
  f("sensor_gen_width", c.sensor_gen_width);
  f("sensor_tile_groups", c.sensor_tile_groups);
  f("sensor_tags_per_class", c.sensor_tags_per_class);
  f("sensor_restore_cycles", c.sensor_restore_cycles);
  f("delta_ready_at_commit", c.delta_ready_at_commit);
  f("deadlock_cycles", c.deadlock_cycles);
}

} // namespace

std::string to_string(PredictorKind k)
{
  switch (k) {
  case PredictorKind::Bimodal: return "bimodal";
  case PredictorKind::Oracle: return "oracle";
  case PredictorKind::AlwaysWrong: return "always-wrong";
  case PredictorKind::AlwaysNotTaken: return "not-taken";
  }
  return "?";
}

PredictorKind parse_predictor(const std::string& s)
{
  for (auto k : {PredictorKind::Bimodal, PredictorKind::Oracle, PredictorKind::AlwaysWrong,
                 PredictorKind::AlwaysNotTaken})
    if (to_string(k) == s)
      return k;
  throw Error("config: unknown predictor '" + s + "'");
}

void MachineConfig::validate() const
{
  auto positive = [](const char* name, auto v) {
    if (v == 0)
      throw Error(std::string("config: ") + name + " must be >= 1");
  };
  MachineConfig copy = *this;
  for_each_scalar(copy, [&](const char* name, auto& v) {
    using T = std::decay_t<decltype(v)>;
    if constexpr (!std::is_same_v<T, bool>)
      positive(name, v);
  });
  for (const auto* cc : {&l1i, &l1d, &l2}) {
    positive("cache ways", cc->ways);
    positive("cache line_bytes", cc->line_bytes);
    if (cc->line_bytes != kLineBytes)
      throw Error("config: only 64-byte cache lines are modelled");
    if (cc->size_bytes % (cc->ways * cc->line_bytes) != 0 || cc->sets() == 0)
      throw Error("config: cache size must be a multiple of ways x line size");
  }
  // mla8 renames 4 vector destinations at once; the sensor pins 8 int
  // parameter registers and still needs one to rename with
  if (vec_phys_regs < 32 + 4 || int_phys_regs < 32 + 9)
    throw Error("config: register files need 4 vector and 9 int registers beyond the architectural state");
  if (sensor_tile_groups > 4)
    throw Error("config: sensor_tile_groups must be in [1, 4]");
  if (sensor_tags_per_class > 4)
    throw Error("config: sensor_tags_per_class must be in [1, 4]");
}

void to_json(json& j, const MachineConfig& c)
{
  j = json::object();
  MachineConfig copy = c;
  for_each_scalar(copy, [&](const char* name, auto& v) { j[name] = v; });
  cache_to_json(j["l1i"], c.l1i);
  cache_to_json(j["l1d"], c.l1d);
  cache_to_json(j["l2"], c.l2);
  j["predictor"] = to_string(c.predictor);
}

void from_json(const json& j, MachineConfig& c)
{
  if (!j.is_object())
    throw Error("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "l1i")
      cache_from_json(value, c.l1i);
    else if (key == "l1d")
      cache_from_json(value, c.l1d);
    else if (key == "l2")
      cache_from_json(value, c.l2);
    else if (key == "predictor")
      c.predictor = parse_predictor(value.get<std::string>());
    else {
      bool found = false;
      for_each_scalar(c, [&](const char* name, auto& v) {
        if (key == name) {
          v = value.get<std::decay_t<decltype(v)>>();
          found = true;
        }
      });
      if (!found)
        throw Error("config: unknown key '" + key + "'");
    }
  }
}

MachineConfig load_config(const std::string& path)
{
  std::ifstream f(path);
  if (!f)
    throw Error("config: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw Error("config: " + path + ": " + e.what());
  }
  MachineConfig c;
  try {
    from_json(j, c);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

} // namespace rsim
