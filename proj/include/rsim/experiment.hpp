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

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rsim/config.hpp"
#include "rsim/energy.hpp"
#include "rsim/kernels.hpp"
#include "rsim/similarity.hpp"
#include "rsim/stats.hpp"
#include "rsim/workloads.hpp"

namespace rsim {

inline constexpr int kReportSchemaVersion = 1;

struct RunSpec
{
  std::string name;
  KernelVariant variant = KernelVariant::SdotBasic;
  Dataflow dataflow = Dataflow::InputStationary;
  SyntheticSpec workload;                 // used when `dump` is null
  std::shared_ptr<const LayerDump> dump;  // frames 1.. are evaluated, frame 0 seeds the history
  MachineConfig machine;
  EnergyModel energy;
  std::ostream* trace = nullptr;          // per-cycle occupancy lines of every evaluated frame
};

struct RunRecord
{
  std::string name;
  KernelVariant variant = KernelVariant::SdotBasic;
  Dataflow dataflow = Dataflow::OutputStationary;
  std::size_t input_len = 0;
  std::size_t output_len = 0;
  double target_similarity = 0.0;
  SimilarityReport similarity; // element-weighted over the evaluated frames
  std::size_t frames = 0;
  SimStats stats;
  EnergyBreakdown energy;
};

/// Simulates one kernel over a workload. Throws SimulationFault when the
/// simulated output differs from the int32 reference product.
RunRecord run_once(const RunSpec& spec);

/// Metrics of a run relative to a baseline run; all recomputable from the
/// raw counters of both.
struct Derived
{
  double speedup = 0.0;
  double exec_time_reduction = 0.0;
  double instruction_reduction = 0.0; // committed instructions
  double frontend_reduction = 0.0;    // instructions through decode
  double dcache_reduction = 0.0;
  double icache_reduction = 0.0;
  double dynamic_energy_reduction = 0.0;
  double static_energy_reduction = 0.0;
  double total_energy_reduction = 0.0;
  double skipped_compute_fraction = 0.0; // Sensor only
};

Derived derive(const RunRecord& run, const RunRecord& baseline);
/// skipped / (skipped + generated Mla8 without overflow extras); 0 for
/// non-Sensor runs.
double skipped_compute_fraction(const SimStats& s);

struct ExperimentReport
{
  MachineConfig machine;
  EnergyModel energy;
  std::string baseline; // name of the baseline run
  std::vector<RunRecord> runs;
};

nlohmann::json to_json(const ExperimentReport& r);
/// Header row plus one row per run; first column is the schema version.
std::string to_csv(const ExperimentReport& r);

struct SweepSpec
{
  std::vector<double> similarities;
  std::vector<std::pair<std::size_t, std::size_t>> shapes; // (input_len, output_len)
  std::vector<KernelVariant> variants;
  KernelVariant baseline = KernelVariant::SdotBasic;
  Dataflow dataflow = Dataflow::InputStationary;
  double zero_fraction = 0.5;
  uint64_t seed = 1;
  ValueRange range = ValueRange::Relu;
  MachineConfig machine;
  EnergyModel energy;
};

struct SweepRow
{
  double similarity = 0.0;
  std::size_t input_len = 0;
  std::size_t output_len = 0;
  KernelVariant variant = KernelVariant::SdotBasic;
  RunRecord run;
  RunRecord baseline;
  Derived derived;
};

/// One row per (similarity, shape, variant), in that nesting order. Member
/// simulations run in parallel; the result does not depend on thread count.
std::vector<SweepRow> sweep(const SweepSpec& spec);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Writes `text` to `path` through a temporary file and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& text);

} // namespace rsim
