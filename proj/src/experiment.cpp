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

#include "rsim/experiment.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace rsim {

namespace {

double ratio_reduction(double run, double base) { return base > 0.0 ? 1.0 - run / base : 0.0; }
double ratio_reduction(uint64_t run, uint64_t base)
{
  return ratio_reduction(static_cast<double>(run), static_cast<double>(base));
}

void accumulate(SimilarityReport& acc, const SimilarityReport& r)
{
  const auto n = static_cast<double>(acc.elements), m = static_cast<double>(r.elements);
  const double w = n + m > 0 ? 1.0 / (n + m) : 0.0;
  acc.total = (acc.total * n + r.total * m) * w;
  acc.zero_identical = (acc.zero_identical * n + r.zero_identical * m) * w;
  acc.nonzero_identical = (acc.nonzero_identical * n + r.nonzero_identical * m) * w;
  acc.per_subvector4_all_zero = (acc.per_subvector4_all_zero * n + r.per_subvector4_all_zero * m) * w;
  acc.elements += r.elements;
}

} // namespace

RunRecord run_once(const RunSpec& spec)
{
  spec.machine.validate();
  spec.energy.validate();
  RunRecord rec;
  rec.name = spec.name.empty() ? std::string(to_string(spec.variant)) : spec.name;
  rec.variant = spec.variant;
  rec.dataflow = spec.dataflow;

  QuantTensor weights;
  std::vector<QuantTensor> frames;
  if (spec.dump) {
    if (spec.dump->frames.size() < 2)
      throw Error("run: a dump needs at least two frames");
    weights = spec.dump->weights;
    frames = spec.dump->frames;
    rec.input_len = spec.dump->input_len;
    rec.output_len = spec.dump->output_len;
  } else {
    Workload w = generate(spec.workload);
    weights = std::move(w.weights);
    frames = {std::move(w.prev_inputs), std::move(w.inputs)};
    rec.input_len = spec.workload.input_len;
    rec.output_len = spec.workload.output_len;
    rec.target_similarity = spec.workload.similarity;
  }

  EvaluationSession session(spec.variant, spec.dataflow, weights, frames[0]);
  for (std::size_t k = 1; k < frames.size(); ++k) {
    session.advance_evaluation(frames[k]);
    RunOptions opts;
    opts.trace = spec.trace;
    rec.stats += session.evaluate(spec.machine, opts);
    if (session.output() != matvec(frames[k], weights))
      throw SimulationFault("run: simulated output of " + std::string(to_string(spec.variant)) + " frame " +
                            std::to_string(k) + " differs from the reference product");
    accumulate(rec.similarity, measure(frames[k], frames[k - 1]));
    ++rec.frames;
  }
  rec.energy = energy_account(rec.stats, spec.energy);
  return rec;
}

double skipped_compute_fraction(const SimStats& s)
{
  const uint64_t done = s.generated_mla8 - s.overflow_split_extra;
  const uint64_t all = done + s.skipped_computes;
  return all ? static_cast<double>(s.skipped_computes) / static_cast<double>(all) : 0.0;
}

Derived derive(const RunRecord& run, const RunRecord& base)
{
  const SimStats& r = run.stats;
  const SimStats& b = base.stats;
  Derived d;
  d.speedup = r.cycles ? static_cast<double>(b.cycles) / static_cast<double>(r.cycles) : 0.0;
  d.exec_time_reduction = ratio_reduction(r.cycles, b.cycles);
  d.instruction_reduction = ratio_reduction(r.committed, b.committed);
  d.frontend_reduction = ratio_reduction(r.decoded, b.decoded);
  d.dcache_reduction = ratio_reduction(r.l1d_accesses, b.l1d_accesses);
  d.icache_reduction = ratio_reduction(r.icache_accesses, b.icache_accesses);
  d.dynamic_energy_reduction = ratio_reduction(run.energy.dynamic, base.energy.dynamic);
  d.static_energy_reduction = ratio_reduction(run.energy.static_energy, base.energy.static_energy);
  d.total_energy_reduction = ratio_reduction(run.energy.total, base.energy.total);
  d.skipped_compute_fraction = skipped_compute_fraction(r);
  return d;
}

// -- report --

namespace {

nlohmann::json to_json(const SimilarityReport& s)
{
  return {{"total", s.total},
          {"zero_identical", s.zero_identical},
          {"nonzero_identical", s.nonzero_identical},
          {"per_subvector4_all_zero", s.per_subvector4_all_zero},
          {"elements", s.elements}};
}

nlohmann::json to_json(const Derived& d)
{
  return {{"speedup", d.speedup},
          {"exec_time_reduction", d.exec_time_reduction},
          {"instruction_reduction", d.instruction_reduction},
          {"frontend_reduction", d.frontend_reduction},
          {"dcache_reduction", d.dcache_reduction},
          {"icache_reduction", d.icache_reduction},
          {"dynamic_energy_reduction", d.dynamic_energy_reduction},
          {"static_energy_reduction", d.static_energy_reduction},
          {"total_energy_reduction", d.total_energy_reduction},
          {"skipped_compute_fraction", d.skipped_compute_fraction}};
}

std::vector<std::pair<std::string, double>> derived_fields(const Derived& d)
{
  return {{"speedup", d.speedup},
          {"exec_time_reduction", d.exec_time_reduction},
          {"instruction_reduction", d.instruction_reduction},
          {"frontend_reduction", d.frontend_reduction},
          {"dcache_reduction", d.dcache_reduction},
          {"icache_reduction", d.icache_reduction},
          {"dynamic_energy_reduction", d.dynamic_energy_reduction},
          {"static_energy_reduction", d.static_energy_reduction},
          {"total_energy_reduction", d.total_energy_reduction},
          {"skipped_compute_fraction", d.skipped_compute_fraction}};
}

std::string fmt(double v)
{
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

const RunRecord* find_run(const ExperimentReport& r, const std::string& name)
{
  for (const auto& run : r.runs)
    if (run.name == name)
      return &run;
  return nullptr;
}

std::string dataflow_name(Dataflow d) { return d == Dataflow::InputStationary ? "is" : "os"; }

} // namespace

nlohmann::json to_json(const ExperimentReport& r)
{
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  nlohmann::json machine;
  to_json(machine, r.machine);
  j["machine"] = machine;
  j["energy_model"] = to_json(r.energy);
  j["baseline"] = r.baseline;
  j["runs"] = nlohmann::json::array();
  const RunRecord* base = find_run(r, r.baseline);
  for (const auto& run : r.runs) {
    nlohmann::json e{{"name", run.name},
                     {"variant", to_string(run.variant)},
                     {"dataflow", dataflow_name(run.dataflow)},
                     {"input_len", run.input_len},
                     {"output_len", run.output_len},
                     {"target_similarity", run.target_similarity},
                     {"frames", run.frames},
                     {"similarity", to_json(run.similarity)},
                     {"stats", to_json(run.stats)},
                     {"energy", to_json(run.energy)}};
    if (base)
      e["derived"] = to_json(derive(run, *base));
    j["runs"].push_back(std::move(e));
  }
  return j;
}

std::string to_csv(const ExperimentReport& r)
{
  std::ostringstream out;
  const RunRecord* base = find_run(r, r.baseline);
  bool header = false;
  for (const auto& run : r.runs) {
    const auto stats = flatten(run.stats);
    const auto derived = derived_fields(base ? derive(run, *base) : Derived{});
    const nlohmann::json energy = to_json(run.energy);
    if (!header) {
      out << "schema_version,name,variant,dataflow,input_len,output_len,target_similarity,measured_similarity";
      for (const auto& [k, v] : stats)
        out << ',' << k;
      for (const auto& [k, v] : energy.items())
        out << ",energy_" << k;
      for (const auto& [k, v] : derived)
        out << ',' << k;
      out << '\n';
      header = true;
    }
    out << kReportSchemaVersion << ',' << run.name << ',' << to_string(run.variant) << ',' << dataflow_name(run.dataflow)
        << ',' << run.input_len << ',' << run.output_len << ',' << fmt(run.target_similarity) << ','
        << fmt(run.similarity.total);
    for (const auto& [k, v] : stats)
      out << ',' << v;
    for (const auto& [k, v] : energy.items())
      out << ',' << fmt(v.get<double>());
    for (const auto& [k, v] : derived)
      out << ',' << fmt(v);
    out << '\n';
  }
  return out.str();
}

// -- sweep --

std::vector<SweepRow> sweep(const SweepSpec& spec)
{
  if (spec.similarities.empty() || spec.shapes.empty() || spec.variants.empty())
    throw Error("sweep: similarity, shape and variant grids must be nonempty");

  // Every distinct simulation once: the baseline plus each requested variant
  // per (similarity, shape) point.
  struct Job
  {
    std::size_t point;
    KernelVariant variant;
  };
  const std::size_t points = spec.similarities.size() * spec.shapes.size();
  std::vector<KernelVariant> kinds{spec.baseline};
  for (auto v : spec.variants)
    if (std::find(kinds.begin(), kinds.end(), v) == kinds.end())
      kinds.push_back(v);
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < points; ++p)
    for (auto v : kinds)
      jobs.push_back({p, v});

  std::vector<RunRecord> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      const std::size_t s = jobs[i].point / spec.shapes.size(), sh = jobs[i].point % spec.shapes.size();
      RunSpec r;
      r.variant = jobs[i].variant;
      r.dataflow = spec.dataflow;
      r.machine = spec.machine;
      r.energy = spec.energy;
      r.workload.input_len = spec.shapes[sh].first;
      r.workload.output_len = spec.shapes[sh].second;
      r.workload.similarity = spec.similarities[s];
      r.workload.zero_fraction = spec.zero_fraction;
      r.workload.seed = spec.seed;
      r.workload.range = spec.range;
      results[i] = run_once(r);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e)
      std::rethrow_exception(e);

  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < points; ++p) {
    const RunRecord& base = results[p * kinds.size()];
    for (auto v : spec.variants) {
      const auto k = static_cast<std::size_t>(std::find(kinds.begin(), kinds.end(), v) - kinds.begin());
      SweepRow row;
      row.similarity = spec.similarities[p / spec.shapes.size()];
      row.input_len = spec.shapes[p % spec.shapes.size()].first;
      row.output_len = spec.shapes[p % spec.shapes.size()].second;
      row.variant = v;
      row.run = results[p * kinds.size() + k];
      row.baseline = base;
      row.derived = derive(row.run, base);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows)
{
  std::ostringstream out;
  out << "schema_version,similarity,input_len,output_len,variant,baseline,cycles,baseline_cycles,"
         "exec_time_reduction,speedup,skipped_compute_fraction,dcache_reduction,icache_reduction,"
         "frontend_reduction,dynamic_energy_reduction,total_energy_reduction\n";
  for (const auto& r : rows)
    out << kReportSchemaVersion << ',' << fmt(r.similarity) << ',' << r.input_len << ',' << r.output_len << ','
        << to_string(r.variant) << ',' << to_string(r.baseline.variant) << ',' << r.run.stats.cycles << ','
        << r.baseline.stats.cycles << ',' << fmt(r.derived.exec_time_reduction) << ',' << fmt(r.derived.speedup)
        << ',' << fmt(r.derived.skipped_compute_fraction) << ',' << fmt(r.derived.dcache_reduction) << ','
        << fmt(r.derived.icache_reduction) << ',' << fmt(r.derived.frontend_reduction) << ','
        << fmt(r.derived.dynamic_energy_reduction) << ',' << fmt(r.derived.total_energy_reduction) << '\n';
  return out.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& text)
{
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f)
      throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

} // namespace rsim
