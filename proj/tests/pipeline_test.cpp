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

#include <doctest.h>

#include <random>
#include <sstream>

#include "rsim/pipeline.hpp"
#include "rsim/programs.hpp"
#include "test_util.hpp"

using namespace rsim;
using namespace rsim::isa;

namespace {

void check_same_state(const Core& core)
{
  const Interpreter& o = core.oracle();
  for (std::size_t r = 0; r < kArchIntRegs; ++r)
    CHECK(core.arch_int(r) == o.int_reg(r));
  for (std::size_t r = 0; r < kArchVecRegs; ++r)
    CHECK(core.arch_vec(r) == o.vec_reg(r));
  CHECK(core.memory() == o.memory());
}

Program counted_loop(int64_t n)
{
  Program p;
  p.emit(mov_imm(x(1), n));
  p.emit(add_imm(x(1), x(1), -1));
  p.emit(branch(fn::kNez, x(1), 1));
  return p;
}

std::vector<MachineConfig> varied_configs()
{
  std::vector<MachineConfig> cs(6);
  cs[1].vec_phys_regs = 36;
  cs[1].int_phys_regs = 48;
  cs[1].rob_entries = 8;
  cs[2].l1_latency = 1;
  cs[2].l2_latency = 40;
  cs[2].dram_latency = 300;
  cs[2].prefetcher = false;
  cs[3].predictor = PredictorKind::AlwaysWrong;
  cs[4].predictor = PredictorKind::AlwaysNotTaken;
  cs[4].fetch_width = cs[4].decode_width = cs[4].rename_width = cs[4].commit_width = 1;
  cs[4].issue_width = cs[4].dispatch_width = 1;
  cs[5].mac_accumulator_forwarding = false;
  cs[5].vec_mac_latency = 7;
  cs[5].lq_entries = 2;
  cs[5].sq_entries = 2;
  cs[5].iq_entries = 4;
  return cs;
}

} // namespace

TEST_CASE("empty program")
{
  Program p;
  MemoryImage m(64);
  const SimStats s = simulate(MachineConfig{}, p, m);
  CHECK(s.committed == 0);
  CHECK(s.cycles <= 2);
}

// Steady-state cost per instruction of a loop body, from two trip counts so
// cold-cache fill cancels out.
double per_instruction(const std::vector<Instruction>& body)
{
  auto run = [&](int64_t trips) {
    Program p;
    p.emit(mov_imm(x(31), trips));
    for (const auto& in : body)
      p.emit(in);
    p.emit(add_imm(x(31), x(31), -1));
    p.emit(branch(fn::kNez, x(31), 1));
    MachineConfig cfg;
    cfg.predictor = PredictorKind::Oracle;
    MemoryImage m(64);
    return simulate(cfg, p, m).cycles;
  };
  return double(run(200) - run(100)) / (100.0 * double(body.size() + 2));
}

TEST_CASE("width bounds")
{
  std::vector<Instruction> chain, indep;
  for (std::size_t i = 0; i < 62; ++i) {
    chain.push_back(add_imm(x(1), x(1), 1));
    indep.push_back(mov_imm(x(static_cast<uint8_t>(1 + i % 30)), static_cast<int64_t>(i)));
  }
  // a dependent chain retires at most one per cycle (the loop counter rides along)
  CHECK(per_instruction(chain) >= 62.0 / 64.0);
  // independent ops are bound by the two integer ALUs
  const double ind = per_instruction(indep);
  CHECK(ind >= 0.5);
  CHECK(ind <= 0.55);
}

TEST_CASE("random programs match the in-order oracle under any config")
{
  std::mt19937_64 rng(1);
  const auto configs = varied_configs();
  for (int n = 0; n < 60; ++n) {
    const auto rp = testing::random_program(rng, 50 + rng() % 400);
    std::optional<std::vector<VecValue>> first;
    for (const auto& cfg : configs) {
      Core core(cfg, rp.program, rp.memory);
      const SimStats s = core.run();
      check_same_state(core);
      CHECK(s.committed <= s.fetched);
      CHECK(s.squash_cycles <= s.cycles);
      CHECK(s.l1d_accesses >= s.l2_accesses);
      CHECK(s.l2_accesses >= s.dram_accesses);
      CHECK(core.int_bank().free_count() == cfg.int_phys_regs - kArchIntRegs);
      CHECK(core.vec_bank().free_count() == cfg.vec_phys_regs - kArchVecRegs);
      std::vector<VecValue> v;
      for (std::size_t r = 0; r < kArchVecRegs; ++r)
        v.push_back(core.arch_vec(r));
      if (!first)
        first = v;
      CHECK(v == *first);
    }
  }
}

TEST_CASE("long random stream")
{
  std::mt19937_64 rng(11);
  const auto rp = testing::random_program(rng, 10'000);
  Core core(MachineConfig{}, rp.program, rp.memory);
  core.run();
  check_same_state(core);
}

TEST_CASE("free lists are conserved every cycle")
{
  std::mt19937_64 rng(2);
  const auto rp = testing::random_program(rng, 300);
  MachineConfig cfg;
  cfg.predictor = PredictorKind::AlwaysWrong;
  Core core(cfg, rp.program, rp.memory);
  bool done = false;
  while (!done) {
    done = core.step();
    for (const auto c : {core.int_bank().census(), core.vec_bank().census()})
      CHECK(c[0] + c[1] + c[2] > 0);
    CHECK(core.int_bank().census()[0] == core.int_bank().free_count());
    CHECK(core.vec_bank().census()[0] == core.vec_bank().free_count());
    CHECK(core.vec_bank().free_count() <= cfg.vec_phys_regs - kArchVecRegs);
  }
}

TEST_CASE("oracle predictor never squashes")
{
  std::mt19937_64 rng(3);
  MachineConfig cfg;
  cfg.predictor = PredictorKind::Oracle;
  for (int n = 0; n < 20; ++n) {
    const auto rp = testing::random_program(rng, 300);
    MemoryImage m = rp.memory;
    const SimStats s = simulate(cfg, rp.program, m);
    CHECK(s.squash_cycles == 0);
    CHECK(s.mispredicts == 0);
    CHECK(s.squashed == 0);
  }
}

TEST_CASE("always-wrong predictor pays the penalty once per branch")
{
  const int64_t n = 200;
  MachineConfig wrong, right;
  wrong.predictor = PredictorKind::AlwaysWrong;
  right.predictor = PredictorKind::Oracle;
  const Program p = counted_loop(n);
  MemoryImage m(64);
  const SimStats sw = simulate(wrong, p, m);
  const SimStats sr = simulate(right, p, m);
  CHECK(sw.mispredicts == static_cast<uint64_t>(n));
  CHECK(sw.squash_cycles == sw.mispredicts * wrong.mispredict_penalty);
  const double per_iter = double(sw.cycles - sr.cycles) / double(n);
  CHECK(per_iter >= wrong.mispredict_penalty - 2.0);
  CHECK(per_iter <= wrong.mispredict_penalty + 2.0);
}

TEST_CASE("latency monotonicity on branch-free kernels")
{
  const Workload w = generate({64, 64, 0.5, 0.5, 4, ValueRange::Relu});
  for (auto v : {KernelVariant::SdotBasic, KernelVariant::SensorBasic, KernelVariant::SensorReuse}) {
    uint64_t last = 0;
    for (uint32_t scale = 1; scale <= 4; ++scale) {
      MachineConfig cfg;
      cfg.l1_latency *= scale;
      cfg.l2_latency *= scale;
      cfg.dram_latency *= scale;
      cfg.vec_mac_latency *= scale;
      cfg.int_alu_latency *= scale;
      EvaluationSession s(v, Dataflow::InputStationary, w.weights, w.prev_inputs);
      s.advance_evaluation(w.inputs);
      const uint64_t c = s.evaluate(cfg).cycles;
      INFO(to_string(v), " scale ", scale);
      CHECK(c >= last);
      last = c;
    }
  }
}

TEST_CASE("faults: committed bad access raises, wrong-path one does not")
{
  Program bad;
  bad.emit(mov_imm(x(1), 1 << 20));
  bad.emit(ld_vec(z(0), x(1), 0));
  MemoryImage m(4096);
  CHECK_THROWS_AS(simulate(MachineConfig{}, bad, m), SimulationFault);

  Program guarded;
  guarded.emit(mov_imm(x(1), 1 << 20));
  guarded.emit(mov_imm(x(2), 0));
  guarded.emit(branch(fn::kEqz, x(2), 4));
  guarded.emit(ld_vec(z(0), x(1), 0)); // only on the wrong path
  guarded.emit(nop());
  MachineConfig cfg;
  cfg.predictor = PredictorKind::AlwaysWrong;
  const SimStats s = simulate(cfg, guarded, m);
  CHECK(s.mispredicts == 1);
  CHECK(s.committed == 4);
}

TEST_CASE("deadlock guard reports instead of hanging")
{
  Program p;
  p.emit(mov_imm(x(1), 0));
  p.emit(ld_vec(z(0), x(1), 0));
  MachineConfig cfg;
  cfg.deadlock_cycles = 5;
  MemoryImage m(4096);
  CHECK_THROWS_AS(simulate(cfg, p, m), SimulationFault);
}

TEST_CASE("trace lines")
{
  Program p = counted_loop(3);
  MemoryImage m(64);
  std::ostringstream trace;
  RunOptions o;
  o.trace = &trace;
  const SimStats s = simulate(MachineConfig{}, p, m, o);
  std::istringstream in(trace.str());
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line); ++lines) {
    CHECK(line.find(" fq=") != std::string::npos);
    CHECK(line.find(" rob=") != std::string::npos);
    CHECK(line.find(" sensor=") != std::string::npos);
    CHECK(line.find(" path=") != std::string::npos);
  }
  CHECK(lines == s.cycles);
}

TEST_CASE("software reuse is slower than the plain sdot kernel at 45%")
{
  const Workload w = generate({256, 256, 0.45, 0.5, 5, ValueRange::Relu});
  auto cycles = [&](KernelVariant v) {
    EvaluationSession s(v, Dataflow::InputStationary, w.weights, w.prev_inputs);
    s.advance_evaluation(w.inputs);
    return s.evaluate(MachineConfig{}).cycles;
  };
  CHECK(cycles(KernelVariant::SdotReuse) >= cycles(KernelVariant::SdotBasic));
}
