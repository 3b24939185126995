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

// Acceptance checks. One line per criterion:
//   [PASS|FAIL] <id> <name>: <measurements>
// Tolerances are fixed here and printed next to the measured values.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "rsim/experiment.hpp"
#include "rsim/programs.hpp"
#include "rsim/sensor.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace rsim;
using namespace rsim::testing;

namespace {

// -- pinned tolerances --
constexpr std::size_t kRandomLayers = 1000;
constexpr std::size_t kMaxDim = 256;
constexpr double kOracleBudgetSeconds = 120.0;
constexpr double kIidSimilarity = 0.45;
constexpr std::size_t kIidElements = 1'000'000;
constexpr double kSigmas = 3.0;
constexpr double kSubvecBudgetSeconds = 60.0;
constexpr double kSdotSlowdownMin = 0.0;
constexpr double kSdotSlowdownMax = 0.50;
constexpr double kSensorSpeedupMin = 2.0;
constexpr double kFrontendShareMax = 0.10;
constexpr double kSaturationMin = 0.30;
constexpr double kSaturationMax = 0.99;
constexpr std::size_t kTransparencyPrograms = 100;
constexpr std::size_t kFaultRuns = 100;
constexpr double kOverheadMax = 0.01;
constexpr std::size_t kOverheadMinMacs = 4096;
constexpr double kSplitBudgetSeconds = 1.0;
constexpr double kEnergyReductionMin = 0.40;

constexpr std::size_t kBigIn = 1024;
constexpr std::size_t kBigOut = 1024;

struct Outcome
{
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4)
{
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

RunRecord run_big(KernelVariant v, double similarity)
{
  RunSpec r;
  r.variant = v;
  r.workload = {kBigIn, kBigOut, similarity, 0.5, 1, ValueRange::Relu};
  return run_once(r);
}

SimStats simulate_layer(const Workload& w, KernelVariant v, Dataflow df, AccumTensor* out = nullptr,
                        RunOptions opts = {})
{
  EvaluationSession s(v, df, w.weights, w.prev_inputs);
  s.advance_evaluation(w.inputs);
  SimStats st = s.evaluate(MachineConfig{}, opts);
  if (out)
    *out = s.output();
  return st;
}

std::size_t nonzero_deltas(const Workload& w)
{
  std::size_t n = 0;
  for (std::size_t i = 0; i < w.inputs.size(); ++i)
    n += w.inputs[i] != w.prev_inputs[i];
  return n;
}

// 1. every variant, functional and timed, equals the scalar reference
Outcome oracle_equivalence()
{
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(0xC0FFEE);
  std::size_t checked = 0, mismatches = 0;
  std::string first;
  for (std::size_t n = 0; n < kRandomLayers; ++n) {
    const RandomLayer rl = random_layer(rng, kMaxDim, n);
    const Workload w = generate(rl.spec);
    const AccumTensor expect = reference_dot(w.inputs, w.weights);
    const AccumTensor prev_out = reference_dot(w.prev_inputs, w.weights);
    for (KernelVariant v : kAllVariants) {
      const LayerSpec layer = bare_layer(rl.spec, v, rl.dataflow);
      const KernelResult fr = run_kernel(v, layer, w.inputs, w.weights, &w.prev_inputs, &prev_out);
      AccumTensor timed;
      simulate_layer(w, v, rl.dataflow, &timed);
      checked += 2;
      for (const AccumTensor* got : std::initializer_list<const AccumTensor*>{&fr.output, &timed}) {
        if (*got == expect)
          continue;
        ++mismatches;
        if (first.empty())
          first = " first=" + std::string(to_string(v)) + "@layer" + std::to_string(n);
      }
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = mismatches == 0 && secs < kOracleBudgetSeconds;
  o.detail = std::to_string(kRandomLayers) + " layers, " + std::to_string(checked) + " outputs (functional+timed), " +
             std::to_string(mismatches) + " mismatches" + first + ", " + fmt(secs, 3) + "s (budget " +
             fmt(kOracleBudgetSeconds) + "s)";
  return o;
}

// 2. Sensor skip identity, counted by the timed pipeline and the functional kernel
Outcome skip_identity()
{
  std::mt19937_64 rng(0xC0FFEE);
  std::size_t bad = 0;
  uint64_t extras = 0;
  std::string first;
  for (std::size_t n = 0; n < kRandomLayers; ++n) {
    const RandomLayer rl = random_layer(rng, kMaxDim, n);
    const Workload w = generate(rl.spec);
    const uint64_t groups = ceil_div(rl.spec.output_len, 16);
    const uint64_t full = rl.spec.input_len * groups;
    const uint64_t nz = nonzero_deltas(w);
    // (1 - zero/n) * full == nz * groups, exactly in integers
    const uint64_t expect = nz * groups;

    const SimStats basic = simulate_layer(w, KernelVariant::SensorBasic, rl.dataflow);
    const SimStats reuse = simulate_layer(w, KernelVariant::SensorReuse, rl.dataflow);
    const AccumTensor prev_out = reference_dot(w.prev_inputs, w.weights);
    const OpCounts fc = run_kernel(KernelVariant::SensorReuse, bare_layer(rl.spec, KernelVariant::SensorReuse, rl.dataflow),
                                   w.inputs, w.weights, &w.prev_inputs, &prev_out)
                            .op_counts;
    extras += reuse.overflow_split_extra;
    const bool ok = basic.generated_weight_loads == full && basic.generated_mla8 == full &&
                    reuse.generated_weight_loads == expect &&
                    reuse.generated_mla8 - reuse.overflow_split_extra == expect &&
                    reuse.skipped_weight_loads == full - expect && reuse.skipped_computes == full - expect &&
                    fc.weight_loads_done == expect && fc.computes_done == expect &&
                    fc.overflow_extra_computes == reuse.overflow_split_extra;
    if (!ok && bad++ == 0)
      first = " first=layer" + std::to_string(n);
  }
  Outcome o;
  o.pass = bad == 0;
  o.detail = std::to_string(kRandomLayers) + " layers, " + std::to_string(bad) + " count mismatches" + first +
             ", overflow-split extras reported separately: " + std::to_string(extras);
  return o;
}

// 3. sdot reuse skips only all-zero 4-lane sub-vectors
Outcome subvector_penalty()
{
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(45);
  std::bernoulli_distribution same(kIidSimilarity);
  std::uniform_int_distribution<int> val(-128, 127);
  std::vector<int8_t> prev(kIidElements), curr(kIidElements);
  for (std::size_t i = 0; i < kIidElements; ++i) {
    prev[i] = static_cast<int8_t>(val(rng));
    if (same(rng)) {
      curr[i] = prev[i];
    } else {
      int v;
      do
        v = val(rng);
      while (v == prev[i]);
      curr[i] = static_cast<int8_t>(v);
    }
  }
  const std::size_t outs = 16;
  QuantTensor weights(kIidElements, outs);
  for (auto& b : weights.data())
    b = static_cast<int8_t>(val(rng));
  const QuantTensor x = QuantTensor::vector(curr), xp = QuantTensor::vector(prev);
  const AccumTensor prev_out = matvec(xp, weights);

  LayerSpec layer;
  layer.input_len = kIidElements;
  layer.output_len = outs;
  layer.kernel_mode = KernelMode::Reuse;
  const OpCounts sd = run_kernel(KernelVariant::SdotReuse, layer, x, weights, &xp, &prev_out).op_counts;
  layer.dataflow = Dataflow::OutputStationary;
  const OpCounts se = run_kernel(KernelVariant::SensorReuse, layer, x, weights, &xp, &prev_out).op_counts;

  const double sdot_frac = double(sd.computes_skipped) / double(sd.computes_skipped + sd.computes_done);
  const double sensor_frac = double(se.computes_skipped) / double(se.computes_skipped + se.computes_done);
  const double p4 = std::pow(kIidSimilarity, 4);
  const double groups = double(kIidElements / kSubVector);
  const double sigma4 = std::sqrt(p4 * (1 - p4) / groups);
  const double sigma1 = std::sqrt(kIidSimilarity * (1 - kIidSimilarity) / double(kIidElements));
  const double secs = seconds_since(t0);

  Outcome o;
  o.pass = std::abs(sdot_frac - p4) <= kSigmas * sigma4 && std::abs(sensor_frac - kIidSimilarity) <= kSigmas * sigma1 &&
           sdot_frac < sensor_frac && secs < kSubvecBudgetSeconds;
  o.detail = "sdot-reuse skip=" + fmt(sdot_frac, 6) + " vs p^4=" + fmt(p4, 6) + " (3sigma=" + fmt(kSigmas * sigma4, 3) +
             "), sensor-reuse skip=" + fmt(sensor_frac, 6) + " vs p=" + fmt(kIidSimilarity) + " (3sigma=" +
             fmt(kSigmas * sigma1, 3) + "), " + fmt(secs, 3) + "s";
  return o;
}

// 4. software reuse is slower, within bounds
Outcome software_slowdown()
{
  const RunRecord base = run_big(KernelVariant::SdotBasic, 0.45);
  const RunRecord reuse = run_big(KernelVariant::SdotReuse, 0.45);
  const double slow = double(reuse.stats.cycles) / double(base.stats.cycles) - 1.0;
  Outcome o;
  o.pass = slow >= kSdotSlowdownMin && slow <= kSdotSlowdownMax;
  o.detail = "1024x1024 @0.45: sdot-basic " + std::to_string(base.stats.cycles) + " cycles, sdot-reuse " +
             std::to_string(reuse.stats.cycles) + " cycles, slowdown " + fmt(100 * slow, 3) + "% (bound [0, 50]%)";
  return o;
}

// 5. sensor speedups
Outcome sensor_speedup()
{
  const RunRecord base = run_big(KernelVariant::SdotBasic, 0.55);
  const RunRecord reuse = run_big(KernelVariant::SensorReuse, 0.55);
  const double speedup = derive(reuse, base).speedup;
  bool ordered = true;
  std::string ladder;
  for (double s : {0.40, 0.55, 0.70, 0.90}) {
    const RunRecord b = run_big(KernelVariant::SdotBasic, s);
    const double sb = derive(run_big(KernelVariant::SensorBasic, s), b).speedup;
    const double sr = derive(run_big(KernelVariant::SensorReuse, s), b).speedup;
    ordered = ordered && sb > 1.0 && sb < sr;
    ladder += " s=" + fmt(s, 2) + ":" + fmt(sb, 3) + "<" + fmt(sr, 3);
  }
  Outcome o;
  o.pass = speedup >= kSensorSpeedupMin && ordered;
  o.detail = "1024x1024 @0.55 sensor-reuse speedup " + fmt(speedup, 4) + "x (min " + fmt(kSensorSpeedupMin) +
             "x); 1 < sensor-basic < sensor-reuse:" + ladder + (ordered ? " ok" : " VIOLATED");
  return o;
}

// 6. front-end traffic
Outcome frontend_reduction()
{
  const RunRecord base = run_big(KernelVariant::SdotBasic, 0.55);
  const RunRecord reuse = run_big(KernelVariant::SensorReuse, 0.55);
  const double fetched = double(reuse.stats.fetched) / double(base.stats.fetched);
  const double decoded = double(reuse.stats.decoded) / double(base.stats.decoded);
  const uint64_t sensor_branches = reuse.stats.committed_branches_by(isa::Origin::Sensor);
  Outcome o;
  o.pass = fetched <= kFrontendShareMax && decoded <= kFrontendShareMax && sensor_branches == 0;
  o.detail = "fetched " + std::to_string(reuse.stats.fetched) + "/" + std::to_string(base.stats.fetched) + " (" +
             fmt(100 * fetched, 3) + "%), decoded " + std::to_string(reuse.stats.decoded) + "/" +
             std::to_string(base.stats.decoded) + " (" + fmt(100 * decoded, 3) + "%, max 10%), sensor branches " +
             std::to_string(sensor_branches);
  return o;
}

// 7. high similarity does not remove all work
Outcome saturation()
{
  const RunRecord basic = run_big(KernelVariant::SensorBasic, 0.99);
  const RunRecord reuse = run_big(KernelVariant::SensorReuse, 0.99);
  const double red = derive(reuse, basic).exec_time_reduction;
  Outcome o;
  o.pass = red > kSaturationMin && red < kSaturationMax;
  o.detail = "1024x1024 @0.99: sensor-basic " + std::to_string(basic.stats.cycles) + ", sensor-reuse " +
             std::to_string(reuse.stats.cycles) + " cycles, reduction " + fmt(100 * red, 3) + "% (bound (30, 99)%)";
  return o;
}

// Random front-end prefix that fills vector and integer registers, then a CRS.
isa::Program transparency_program(std::mt19937_64& rng, const MemoryLayout& ml, uint64_t scratch, std::size_t scratch_bytes)
{
  using namespace isa;
  Program p;
  const uint8_t base = 20;
  p.emit(mov_imm(x(base), static_cast<int64_t>(scratch)));
  std::uniform_int_distribution<int> reg(0, 31), op(0, 5), k(0, 3);
  std::uniform_int_distribution<uint64_t> off(0, scratch_bytes / 16 - 1);
  for (uint8_t r = 0; r < 32; ++r)
    p.emit(ld_vec(z(r), x(base), static_cast<int64_t>(16 * off(rng))));
  const std::size_t extra = 8 + rng() % 32;
  for (std::size_t n = 0; n < extra; ++n) {
    const auto a = static_cast<uint8_t>(reg(rng)), b = static_cast<uint8_t>(reg(rng)), c = static_cast<uint8_t>(reg(rng));
    switch (op(rng)) {
    case 0: p.emit(sub_vec8(z(a), z(b), z(c))); break;
    case 1: p.emit(sdot(z(a), z(b), z(c), static_cast<uint8_t>(k(rng)))); break;
    case 2: p.emit(vsub_i16(z(a), z(b), z(c))); break;
    case 3: p.emit(ld_vec(z(a), x(base), static_cast<int64_t>(16 * off(rng)))); break;
    case 4: p.emit(st_vec(z(a), x(base), static_cast<int64_t>(16 * off(rng)))); break;
    default: p.emit(mov_imm(x(static_cast<uint8_t>(1 + a % 16)), static_cast<int64_t>(rng() % 100000))); break;
    }
  }
  p.emit(mov_imm(x(1), static_cast<int64_t>(ml.param_addr)));
  p.emit(crs(x(1)));
  return p;
}

// 8. transparency and rollback
Outcome transparency_rollback()
{
  std::mt19937_64 rng(8);
  std::size_t state_bad = 0, out_bad = 0, fault_bad = 0, not_injected = 0;

  for (std::size_t n = 0; n < kTransparencyPrograms; ++n) {
    SyntheticSpec s{1 + rng() % 96, 1 + rng() % 96, double(rng() % 101) / 100.0, 0.5, rng(),
                    n % 2 ? ValueRange::Signed : ValueRange::Relu};
    const auto v = n % 2 ? KernelVariant::SensorReuse : KernelVariant::SensorBasic;
    const auto df = rng() % 2 ? Dataflow::InputStationary : Dataflow::OutputStationary;
    const Workload w = generate(s);
    const MemoryLayout ml = plan_layout(s.input_len, s.output_len, is_reuse(v) ? KernelMode::Reuse : KernelMode::Basic, df);
    const std::size_t scratch_bytes = 4096;
    const uint64_t scratch = ml.image_bytes;
    MemoryImage mem(ml.image_bytes + scratch_bytes);
    const AccumTensor prev_out = matvec(w.prev_inputs, w.weights);
    stage(mem, ml, weight_layout(v), {&w.inputs, &w.prev_inputs, &w.weights, &prev_out});
    std::vector<uint8_t> noise(scratch_bytes);
    for (auto& b : noise)
      b = static_cast<uint8_t>(rng());
    mem.write(scratch, noise);

    const isa::Program prog = transparency_program(rng, ml, scratch, scratch_bytes);
    Core core(MachineConfig{}, prog, mem);
    core.run();
    const Interpreter& oracle = core.oracle(); // never touches vector registers at the CRS
    for (std::size_t r = 0; r < isa::kArchVecRegs; ++r)
      state_bad += !(core.arch_vec(r) == oracle.vec_reg(r));
    for (std::size_t r = 0; r < isa::kArchIntRegs; ++r)
      state_bad += core.arch_int(r) != oracle.int_reg(r);
    out_bad += !(core.memory() == oracle.memory());
  }

  // At least 16 inputs and similarity <= 0.95 leave one nonzero delta, so
  // every kernel ends in output stores and any index has a memory op after it.
  for (std::size_t n = 0; n < kFaultRuns; ++n) {
    SyntheticSpec s{16 + rng() % 113, 1 + rng() % 128, double(rng() % 96) / 100.0, 0.5, rng(),
                    n % 2 ? ValueRange::Signed : ValueRange::Relu};
    const auto v = n % 3 ? KernelVariant::SensorReuse : KernelVariant::SensorBasic;
    const auto df = rng() % 2 ? Dataflow::InputStationary : Dataflow::OutputStationary;
    const Workload w = generate(s);
    const SimStats clean = simulate_layer(w, v, df);
    RunOptions opts;
    opts.inject_fault_at = rng() % (clean.generated - clean.param_loads);
    AccumTensor got;
    const SimStats st = simulate_layer(w, v, df, &got, opts);
    fault_bad += !(got == reference_dot(w.inputs, w.weights));
    not_injected += st.rollbacks != 1;
  }

  Outcome o;
  o.pass = state_bad == 0 && out_bad == 0 && fault_bad == 0 && not_injected == 0;
  o.detail = std::to_string(kTransparencyPrograms) + " programs: " + std::to_string(state_bad) +
             " register mismatches, " + std::to_string(out_bad) + " memory mismatches; " + std::to_string(kFaultRuns) +
             " fault runs: " + std::to_string(fault_bad) + " output mismatches, " + std::to_string(not_injected) +
             " runs without exactly one rollback";
  return o;
}

// 9. drain + restore overhead
Outcome overhead_bound()
{
  double worst = 0.0;
  std::string where;
  const std::pair<std::size_t, std::size_t> shapes[] = {{64, 64}, {100, 41}, {256, 256}, {1024, 1024}};
  for (auto [in, out] : shapes) {
    if (in * out < kOverheadMinMacs)
      continue;
    for (auto v : {KernelVariant::SensorBasic, KernelVariant::SensorReuse})
      for (auto df : {Dataflow::OutputStationary, Dataflow::InputStationary}) {
        const Workload w = generate({in, out, 0.55, 0.5, 9, ValueRange::Relu});
        const SimStats st = simulate_layer(w, v, df);
        const double r = double(st.drain_cycles + st.restore_cycles) / double(st.sensor_operating_cycles);
        if (r >= worst) {
          worst = r;
          where = std::to_string(in) + "x" + std::to_string(out) + " " + std::string(to_string(v)) +
                  (df == Dataflow::InputStationary ? " is" : " os") + " (" +
                  std::to_string(st.drain_cycles + st.restore_cycles) + "/" +
                  std::to_string(st.sensor_operating_cycles) + ")";
        }
      }
  }
  Outcome o;
  o.pass = worst < kOverheadMax;
  o.detail = "worst (drain+restore)/operating = " + fmt(100 * worst, 3) + "% at " + where + " (max 1%)";
  return o;
}

// 10. overflow split, exhaustive
Outcome overflow_split()
{
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t bad = 0, checked = 0;
  std::mt19937_64 rng(10);
  for (int d = -255; d <= 255; ++d) {
    std::vector<int8_t> parts;
    if (d >= -128 && d <= 127) {
      parts.push_back(static_cast<int8_t>(d));
    } else {
      const DeltaSplit s = split_overflow(static_cast<int16_t>(d));
      parts.assign(s.view().begin(), s.view().end());
    }
    int sum = 0;
    for (int8_t p : parts)
      sum += p; // int8 storage already bounds each part to [-128, 127]
    bad += sum != d || parts.empty() || parts.size() > 3;
    for (int wv = -128; wv <= 127; ++wv) {
      Vec16i8 w{};
      w.fill(static_cast<int8_t>(wv));
      Vec16i32 split_acc{}, wide{};
      for (auto& a : split_acc)
        a = static_cast<int32_t>(rng());
      wide = split_acc;
      for (int8_t p : parts)
        mla8_op(split_acc, w, p);
      for (auto& a : wide)
        a = wrap_add32(a, int64_t(wv) * d);
      bad += split_acc != wide;
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = bad == 0 && secs < kSplitBudgetSeconds;
  o.detail = "511 deltas x 256 weights = " + std::to_string(checked) + " cases, " + std::to_string(bad) + " failures, " +
             fmt(secs * 1000, 3) + "ms (budget 1s)";
  return o;
}

// 11. energy ordering and total reduction
Outcome energy_direction()
{
  const RunRecord base = run_big(KernelVariant::SdotBasic, 0.55);
  const RunRecord basic = run_big(KernelVariant::SensorBasic, 0.55);
  const RunRecord reuse = run_big(KernelVariant::SensorReuse, 0.55);
  const double red = derive(reuse, base).total_energy_reduction;
  const bool ordered = reuse.energy.dynamic < basic.energy.dynamic && basic.energy.dynamic < base.energy.dynamic;
  Outcome o;
  o.pass = ordered && red >= kEnergyReductionMin;
  o.detail = "default EnergyModel, 1024x1024 @0.55: dynamic reuse " + fmt(reuse.energy.dynamic, 6) + " < basic " +
             fmt(basic.energy.dynamic, 6) + " < sdot " + fmt(base.energy.dynamic, 6) + (ordered ? " ok" : " VIOLATED") +
             "; total reduction " + fmt(100 * red, 4) + "% (min 40%)";
  return o;
}

std::map<std::string, std::string> similarity_row(const fs::path& rsim, const fs::path& dir, std::size_t n)
{
  const fs::path dump = dir / ("dump" + std::to_string(n));
  const fs::path csv = dir / ("sim" + std::to_string(n) + ".csv");
  const std::string gen = "\"" + rsim.string() + "\" gen-dump --frames 2 --similarity 0.41 --zero-frac 0.9 --shape " +
                          std::to_string(n) + "x16 --seed 12 --name acc --out \"" + dump.string() + "\" > /dev/null";
  const std::string sim = "\"" + rsim.string() + "\" similarity --dump \"" + dump.string() + "\" > \"" + csv.string() + "\"";
  if (std::system(gen.c_str()) != 0 || std::system(sim.c_str()) != 0)
    throw Error("rsim command failed");
  std::ifstream f(csv);
  std::string header, line;
  std::getline(f, header);
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string c; std::getline(ss, c, ',');)
      out.push_back(c);
    return out;
  };
  const auto names = split(header);
  while (std::getline(f, line)) {
    const auto cells = split(line);
    if (cells.size() == names.size() && cells[1] == "acc" && cells[2] == "1") {
      std::map<std::string, std::string> row;
      for (std::size_t i = 0; i < names.size(); ++i)
        row[names[i]] = cells[i];
      return row;
    }
  }
  throw Error("no frame row in similarity output");
}

// 12. similarity tooling on a synthetic dump
Outcome similarity_tooling(const fs::path& rsim)
{
  const fs::path dir = fs::temp_directory_path() / ("rsim-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  Outcome o;
  for (std::size_t n : {1000u, 4096u}) {
    const auto row = similarity_row(rsim, dir, n);
    const double total = std::stod(row.at("total"));
    const double zero = std::stod(row.at("zero_identical"));
    const double nonzero = std::stod(row.at("nonzero_identical"));
    const double ident = std::round(total * double(n));
    const double zero_n = std::round(zero * double(n));
    // zero share: exact when 0.9 * identical is integral, else the nearest count
    const bool exact_split = std::abs(zero_n - 0.9 * ident) <= 0.5 && std::abs(zero + nonzero - total) < 1e-12;
    const bool ok = std::abs(total - 0.41) <= 1.0 / double(n) + 1e-12 && exact_split &&
                    (std::fmod(0.9 * ident, 1.0) != 0.0 || std::abs(zero / total - 0.9) < 1e-12);
    o.pass = o.pass && ok;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("n=") + std::to_string(n) + ": total " + fmt(total, 6) +
                " (|err| " + fmt(std::abs(total - 0.41), 3) + " <= 1/n), zero share " + fmt(zero / total, 6) +
                ", nonzero share " + fmt(nonzero / total, 6) + " (" + fmt(zero_n, 6) + "/" + fmt(ident, 6) + ")";
  }
  fs::remove_all(dir);
  return o;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"rsim acceptance checks"};
  std::vector<int> only;
  std::string rsim_path = RSIM_CLI_PATH;
  app.add_option("--only", only, "Run only these criteria (1-12)");
  app.add_option("--rsim", rsim_path, "Path to the rsim executable");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle-equivalence", oracle_equivalence},
      {"skip-identity", skip_identity},
      {"subvector-penalty", subvector_penalty},
      {"software-reuse-slowdown", software_slowdown},
      {"sensor-speedup", sensor_speedup},
      {"frontend-reduction", frontend_reduction},
      {"saturation", saturation},
      {"transparency-rollback", transparency_rollback},
      {"overhead-bound", overhead_bound},
      {"overflow-split", overflow_split},
      {"energy-direction", energy_direction},
      {"similarity-tooling", [&] { return similarity_tooling(rsim_path); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end())
      continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
