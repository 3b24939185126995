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

// rsim: command-line driver for single runs, sweeps and similarity analysis.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsim/experiment.hpp"
#include "rsim/similarity.hpp"
#include "rsim/workloads.hpp"

namespace fs = std::filesystem;
using namespace rsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFault = 2;

class UsageError : public Error
{
public:
  using Error::Error;
};

struct Settings
{
  MachineConfig machine;
  EnergyModel energy;
};

// Config file: either a bare MachineConfig object or
// {"machine": {...}, "energy": {...}} with both parts optional.
Settings read_settings(const std::string& flag)
{
  Settings s;
  std::string path = flag;
  if (path.empty())
    if (const char* env = std::getenv("RSIM_CONFIG"))
      path = env;
  if (path.empty())
    return s;
  std::ifstream f(path);
  if (!f)
    throw UsageError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
  try {
    if (j.contains("machine") || j.contains("energy")) {
      if (j.contains("machine"))
        s.machine = j.at("machine").get<MachineConfig>();
      if (j.contains("energy"))
        s.energy = energy_model_from_json(j.at("energy"));
    } else {
      s.machine = j.get<MachineConfig>();
    }
    s.machine.validate();
  } catch (const Error& e) {
    throw UsageError("config " + path + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  return s;
}

Settings load_settings(const std::string& flag, std::size_t tile_groups)
{
  Settings s = read_settings(flag);
  if (tile_groups)
    s.machine.sensor_tile_groups = tile_groups;
  return s;
}

KernelVariant parse_kernel(const std::string& name)
{
  auto v = parse_variant(name);
  if (!v)
    throw UsageError("unknown kernel \"" + name + "\"");
  return *v;
}

std::pair<std::size_t, std::size_t> parse_shape(const std::string& s)
{
  const auto x = s.find('x');
  try {
    if (x == std::string::npos)
      throw std::invalid_argument(s);
    std::size_t used = 0;
    const auto i = std::stoull(s.substr(0, x), &used);
    if (used != x)
      throw std::invalid_argument(s);
    const auto o = std::stoull(s.substr(x + 1), &used);
    if (used != s.size() - x - 1 || i == 0 || o == 0)
      throw std::invalid_argument(s);
    return {i, o};
  } catch (const std::exception&) {
    throw UsageError("shape must look like <inputs>x<outputs>, got \"" + s + "\"");
  }
}

Dataflow parse_dataflow(const std::string& s)
{
  if (s == "os")
    return Dataflow::OutputStationary;
  if (s == "is")
    return Dataflow::InputStationary;
  throw UsageError("dataflow must be os or is");
}

ValueRange parse_range(const std::string& s)
{
  if (s == "relu")
    return ValueRange::Relu;
  if (s == "signed")
    return ValueRange::Signed;
  throw UsageError("range must be relu or signed");
}

template <class T>
std::vector<T> split_list(const std::string& s, T (*parse)(const std::string&))
{
  std::vector<T> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty())
      out.push_back(parse(item));
  return out;
}

double parse_fraction(const std::string& s)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && v >= 0.0 && v <= 1.0)
      return v;
  } catch (const std::exception&) {
  }
  throw UsageError("expected a fraction in [0, 1], got \"" + s + "\"");
}

struct WorkloadFlags
{
  double similarity = 0.5;
  double zero_frac = 0.5;
  std::string shape = "256x256";
  std::string dataflow = "is";
  std::string dump;
  std::string config;
  uint64_t seed = 1;
  std::string out = "rsim-out";
  std::string range = "relu";
  std::size_t tile_groups = 0; // 0: keep the config value

  void attach(CLI::App* c, bool with_dump, bool simulates = true)
  {
    c->add_option("--similarity", similarity, "Fraction of identical input positions")->check(CLI::Range(0.0, 1.0));
    c->add_option("--zero-frac", zero_frac, "Share of identical positions that are zero")->check(CLI::Range(0.0, 1.0));
    c->add_option("--shape", shape, "Layer shape <inputs>x<outputs>");
    c->add_option("--dataflow", dataflow, "Sensor loop order")->check(CLI::IsMember({"os", "is"}));
    if (with_dump)
      c->add_option("--dump", dump, "Layer dump directory instead of a synthetic workload");
    if (simulates)
      c->add_option("--config", config, "Machine/energy config (JSON); default from RSIM_CONFIG");
    c->add_option("--seed", seed, "Workload seed");
    c->add_option("--out", out, "Output directory");
    c->add_option("--range", range, "Synthetic activation range")->check(CLI::IsMember({"relu", "signed"}));
    if (simulates)
      c->add_option("--tile-groups", tile_groups, "Output groups of 16 per ReuseSensor tile (1-4)")
          ->check(CLI::Range(1, 4));
  }
};

void print_run(const RunRecord& r, const RunRecord* base)
{
  std::cout << r.name << ": cycles=" << r.stats.cycles << " committed=" << r.stats.committed
            << " decoded=" << r.stats.decoded << " l1d=" << r.stats.l1d_accesses
            << " energy_total=" << r.energy.total;
  if (is_sensor(r.variant))
    std::cout << " skipped_compute=" << skipped_compute_fraction(r.stats);
  if (base && base != &r)
    std::cout << " speedup=" << derive(r, *base).speedup;
  std::cout << '\n';
}

int cmd_run(const std::string& kernel, const std::string& baseline, const std::string& trace_path,
            const WorkloadFlags& w)
{
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace)
      throw UsageError("cannot write trace " + trace_path);
  }
  const Settings s = load_settings(w.config, w.tile_groups);
  const auto [in, out] = parse_shape(w.shape);
  std::shared_ptr<const LayerDump> dump;
  if (!w.dump.empty()) {
    auto d = read_dumps(w.dump);
    if (d.size() != 1)
      throw UsageError("run takes a single-layer dump");
    dump = std::make_shared<LayerDump>(std::move(d.front()));
  }
  auto make = [&](KernelVariant v) {
    RunSpec r;
    r.name = std::string(to_string(v));
    r.variant = v;
    r.dataflow = dump ? dump->dataflow : parse_dataflow(w.dataflow);
    r.workload = {in, out, w.similarity, w.zero_frac, w.seed, parse_range(w.range)};
    r.dump = dump;
    r.machine = s.machine;
    r.energy = s.energy;
    return r;
  };

  ExperimentReport report;
  report.machine = s.machine;
  report.energy = s.energy;
  const KernelVariant k = parse_kernel(kernel), b = parse_kernel(baseline);
  report.baseline = std::string(to_string(b));
  report.runs.push_back(run_once(make(b)));
  if (k != b) {
    RunSpec spec = make(k);
    if (trace.is_open())
      spec.trace = &trace;
    report.runs.push_back(run_once(spec));
  } else if (trace.is_open()) {
    throw UsageError("--trace needs a kernel different from the baseline");
  }

  write_atomic(fs::path(w.out) / "report.json", to_json(report).dump(2) + "\n");
  write_atomic(fs::path(w.out) / "report.csv", to_csv(report));
  for (const auto& r : report.runs)
    print_run(r, &report.runs.front());
  return kExitOk;
}

int cmd_similarity(const std::string& dump, const std::string& out)
{
  const auto layers = read_dumps(dump);
  std::ostringstream csv;
  csv << std::setprecision(std::numeric_limits<double>::max_digits10);
  csv << "schema_version,layer,frame,elements,total,zero_identical,nonzero_identical,subvector4_all_zero\n";
  auto row = [&](const std::string& layer, const std::string& frame, const SimilarityReport& r) {
    csv << kReportSchemaVersion << ',' << layer << ',' << frame << ',' << r.elements << ',' << r.total << ','
        << r.zero_identical << ',' << r.nonzero_identical << ',' << r.per_subvector4_all_zero << '\n';
  };
  std::vector<SimilarityReport> all;
  for (const auto& l : layers) {
    if (l.frames.size() < 2)
      throw Error("dump " + l.name + " needs at least two frames");
    const auto reports = measure_stream(l.frames);
    for (std::size_t k = 0; k < reports.size(); ++k)
      row(l.name, std::to_string(k + 1), reports[k]);
    const auto sum = summarize(reports);
    row(l.name, "mean", sum.unweighted);
    all.insert(all.end(), reports.begin(), reports.end());
  }
  const auto sum = summarize(all);
  row("all", "mean", sum.unweighted);
  row("all", "weighted_mean", sum.weighted);
  if (!out.empty())
    write_atomic(fs::path(out) / "similarity.csv", csv.str());
  std::cout << csv.str();
  return kExitOk;
}

int cmd_sweep(const std::string& sims, const std::string& shapes, const std::string& kernels,
              const std::string& baseline, const WorkloadFlags& w)
{
  const Settings s = load_settings(w.config, w.tile_groups);
  SweepSpec spec;
  spec.similarities = split_list<double>(sims, parse_fraction);
  spec.shapes = split_list<std::pair<std::size_t, std::size_t>>(shapes, parse_shape);
  spec.variants = split_list<KernelVariant>(kernels, parse_kernel);
  if (spec.similarities.empty() || spec.shapes.empty() || spec.variants.empty())
    throw UsageError("sweep grids must be nonempty");
  spec.baseline = parse_kernel(baseline);
  spec.dataflow = parse_dataflow(w.dataflow);
  spec.zero_fraction = w.zero_frac;
  spec.seed = w.seed;
  spec.range = parse_range(w.range);
  spec.machine = s.machine;
  spec.energy = s.energy;
  const std::string csv = sweep_csv(sweep(spec));
  write_atomic(fs::path(w.out) / "sweep.csv", csv);
  std::cout << csv;
  return kExitOk;
}

int cmd_gen_dump(std::size_t frames, const WorkloadFlags& w, const std::string& name)
{
  const auto [in, out] = parse_shape(w.shape);
  SyntheticSpec spec{in, out, w.similarity, w.zero_frac, w.seed, parse_range(w.range)};
  LayerDump d;
  d.name = name;
  d.input_len = in;
  d.output_len = out;
  d.dataflow = parse_dataflow(w.dataflow);
  d.weights = generate(spec).weights;
  d.frames = generate_frames(spec, frames);
  write_dump(d, w.out);
  std::cout << "wrote " << frames << " frames of " << name << " to " << w.out << '\n';
  return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"rsim: out-of-order core simulator with a ReuseSensor"};
  app.require_subcommand(1);

  std::string kernel = "sensor-reuse", baseline = "sdot-basic";
  WorkloadFlags run_flags;
  auto* run = app.add_subcommand("run", "Simulate one kernel and its baseline, write report.json/report.csv");
  run->add_option("--kernel", kernel, "sdot-basic|sdot-reuse|mla-basic|mla-reuse|sensor-basic|sensor-reuse");
  run->add_option("--baseline", baseline, "Kernel the derived metrics are relative to");
  std::string trace_path;
  run->add_option("--trace", trace_path, "Write the per-cycle pipeline trace of --kernel to this file");
  run_flags.attach(run, true);

  std::string sim_dump, sim_out;
  auto* simc = app.add_subcommand("similarity", "Per-frame input similarity of a layer dump, as CSV");
  simc->add_option("--dump", sim_dump, "Dump directory (one layer, or one per subdirectory)")->required();
  simc->add_option("--out", sim_out, "Also write similarity.csv here");

  std::string sims = "0,0.5,1", shapes = "256x256", kernels = "sensor-basic,sensor-reuse", sweep_base = "sdot-basic";
  WorkloadFlags sweep_flags;
  auto* sw = app.add_subcommand("sweep", "Grid of similarities x shapes x kernels, write sweep.csv");
  sw->add_option("--similarities", sims, "Comma-separated fractions");
  sw->add_option("--shapes", shapes, "Comma-separated <inputs>x<outputs>");
  sw->add_option("--kernels", kernels, "Comma-separated kernel names");
  sw->add_option("--baseline", sweep_base, "Baseline kernel");
  sweep_flags.attach(sw, false);

  std::size_t frames = 2;
  std::string dump_name = "synthetic";
  WorkloadFlags gen_flags;
  auto* gen = app.add_subcommand("gen-dump", "Write a synthetic layer dump");
  gen->add_option("--frames", frames, "Number of input frames")->check(CLI::PositiveNumber);
  gen->add_option("--name", dump_name, "Layer name in the manifest");
  gen_flags.attach(gen, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run)
      return cmd_run(kernel, baseline, trace_path, run_flags);
    if (*simc)
      return cmd_similarity(sim_dump, sim_out);
    if (*sw)
      return cmd_sweep(sims, shapes, kernels, sweep_base, sweep_flags);
    if (*gen)
      return cmd_gen_dump(frames, gen_flags, dump_name);
  } catch (const UsageError& e) {
    std::cerr << "rsim: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SimulationFault& e) {
    std::cerr << "rsim: simulation fault: " << e.what() << '\n';
    return kExitFault;
  } catch (const Error& e) {
    std::cerr << "rsim: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "rsim: " << e.what() << '\n';
    return kExitFault;
  }
  return kExitUsage;
}
