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

#include "rsim/pipeline.hpp"

#include <algorithm>
#include <cstring>
#include <string>

namespace rsim {

using isa::Opcode;
using isa::RegClass;

namespace {

constexpr uint64_t kCodeBase = 1ull << 40;
constexpr uint64_t kSensorKeyBase = 1ull << 48;

bool is_mac(Opcode op) { return op == Opcode::Sdot || op == Opcode::Mla || op == Opcode::Mla8; }

} // namespace

Core::Fu Core::fu_of(Opcode op)
{
  switch (op) {
  case Opcode::ScalarAlu:
  case Opcode::CopyIndexed:
  case Opcode::Branch: return Fu::Int;
  case Opcode::SubVec8:
  case Opcode::Sdot:
  case Opcode::Mla:
  case Opcode::Mla8:
  case Opcode::VecAlu: return Fu::Vec;
  case Opcode::LdScalar:
  case Opcode::LdVec: return Fu::Load;
  case Opcode::StVec: return Fu::Store;
  case Opcode::Crs:
  case Opcode::Nop: return Fu::None;
  }
  return Fu::None;
}

Core::Core(const MachineConfig& cfg, const isa::Program& program, MemoryImage memory, RunOptions options)
    : cfg_(cfg), program_(&program), mem_(std::move(memory)), opts_(options), oracle_(program, mem_), caches_(cfg),
      bp_(cfg.predictor, cfg.predictor_entries), ints_(cfg.int_phys_regs, isa::kArchIntRegs),
      vecs_(cfg.vec_phys_regs, isa::kArchVecRegs)
{
  cfg_.validate();
  for (const auto& in : program.code)
    in.validate();
}

SimStats simulate(const MachineConfig& cfg, const isa::Program& program, MemoryImage& memory,
                  const RunOptions& options)
{
  Core core(cfg, program, memory, options);
  SimStats s = core.run();
  memory = core.memory();
  return s;
}

bool Core::finished() const
{
  return !wrong_path_ && oracle_.done() && fq_.empty() && dq_.empty() && rob_.empty() &&
         sensor_.phase == SensorPhase::Idle;
}

SimStats Core::run()
{
  while (!step(1u << 20)) {
  }
  return stats_;
}

bool Core::step(uint64_t cycles)
{
  for (uint64_t i = 0; i < cycles; ++i) {
    if (finished())
      break;
    cycle();
  }
  const auto& m = caches_.counters();
  stats_.cycles = now_;
  stats_.icache_accesses = m.l1i_accesses;
  stats_.l1i_misses = m.l1i_misses;
  stats_.l1d_accesses = m.l1d_accesses;
  stats_.l1d_misses = m.l1d_misses;
  stats_.l2_accesses = m.l2_accesses;
  stats_.dram_accesses = m.dram_accesses;
  stats_.l2_inst_accesses = m.l2_inst_accesses;
  stats_.dram_inst_accesses = m.dram_inst_accesses;
  stats_.l2_prefetches = m.l2_prefetches;
  stats_.dram_prefetch_accesses = m.dram_prefetch_accesses;
  return finished();
}

void Core::cycle()
{
  complete();
  const uint64_t before = stats_.committed;
  const SensorPhase phase_before = sensor_.phase;
  commit();
  issue();
  sensor_tick();
  rename_dispatch();
  decode();
  fetch();
  if (opts_.trace)
    trace_line(static_cast<std::size_t>(stats_.committed - before));

  if (stats_.committed != before || sensor_.phase != phase_before)
    last_progress_ = now_;
  ++now_;
  if (now_ - last_progress_ > cfg_.deadlock_cycles) {
    std::string head = rob_.empty() ? "empty" : isa::disassemble(rob_.front().in);
    throw SimulationFault("structural deadlock: no progress for " + std::to_string(cfg_.deadlock_cycles) +
                          " cycles at cycle " + std::to_string(now_) + ", ROB head: " + head +
                          ", sensor phase: " + std::string(to_string(sensor_.phase)));
  }
}

void Core::trace_line(std::size_t commits)
{
  *opts_.trace << now_ << " fq=" << fq_.size() << " dq=" << dq_.size() << " rob=" << rob_.size()
               << " iq=" << iq_count_ << " lq=" << lq_count_ << " sq=" << sq_count_ << " commit=" << commits
               << " sensor=" << to_string(sensor_.phase) << " path=" << (wrong_path_ ? "wrong" : "ok") << '\n';
}

// -- front end --

void Core::fetch()
{
  if (now_ < fetch_resume_)
    return;
  uint64_t line = UINT64_MAX;
  for (std::size_t n = 0; n < cfg_.fetch_width && fq_.size() < cfg_.fetch_queue; ++n) {
    const uint64_t pc = wrong_path_ ? wp_pc_ : oracle_.pc();
    if (pc >= program_->size())
      break;
    const uint64_t addr = kCodeBase + 4 * pc;
    if (addr / kLineBytes != line) {
      if (line != UINT64_MAX)
        break; // one cache line per fetch cycle
      line = addr / kLineBytes;
      const uint64_t ready = caches_.inst_access(addr, now_);
      if (ready > now_ + cfg_.l1_latency) {
        fetch_resume_ = ready - cfg_.l1_latency;
        return;
      }
    }

    DynInst d;
    d.in = program_->code[pc];
    d.in.origin = isa::Origin::FrontEnd;
    d.pc = pc;
    d.prefetch_key = pc;
    d.wrong_path = wrong_path_;
    d.fetch_cycle = now_;
    ++stats_.fetched;

    bool taken = false;
    if (!wrong_path_) {
      const Interpreter::Step s = oracle_.step();
      taken = s.taken;
    }
    if (d.in.op == Opcode::Branch) {
      bool predicted;
      if (d.in.fn == isa::fn::kAlways)
        predicted = true;
      else if (wrong_path_ && (bp_.kind() == PredictorKind::Oracle || bp_.kind() == PredictorKind::AlwaysWrong))
        predicted = false;
      else
        predicted = bp_.predict(pc, taken);
      d.predicted_taken = predicted;
      if (!wrong_path_ && predicted != taken) {
        d.mispredict = true;
        wrong_path_ = true;
      }
      d.taken = taken;
      if (wrong_path_)
        wp_pc_ = predicted ? static_cast<uint64_t>(d.in.imm) : pc + 1;
    } else if (wrong_path_) {
      wp_pc_ = pc + 1;
    }
    fq_.push_back(d);
    if (d.predicted_taken)
      break;
  }
}

void Core::decode()
{
  for (std::size_t n = 0; n < cfg_.decode_width && !decode_blocked_; ++n) {
    if (fq_.empty() || fq_.front().fetch_cycle >= now_ || dq_.size() >= cfg_.decode_queue)
      break;
    DynInst d = fq_.front();
    fq_.pop_front();
    d.decode_cycle = now_;
    ++stats_.decoded;
    if (d.in.op == Opcode::Crs) {
      if (sensor_.phase != SensorPhase::Idle)
        throw SimulationFault("nested CRS while the ReuseSensor is active");
      sensor_.set_phase(SensorPhase::Preparing);
      sensor_.crs_decode_cycle = now_;
      sensor_.crs_seq = 0;
      sensor_.activation_cycle = now_;
      decode_blocked_ = true;
    }
    dq_.push_back(d);
  }
}

// -- rename / dispatch --

bool Core::can_dispatch(const isa::Instruction& in)
{
  auto blocked = [](uint64_t& counter) {
    ++counter;
    return false;
  };
  if (rob_.size() >= cfg_.rob_entries)
    return blocked(stats_.stall_rob);
  if (fu_of(in.op) != Fu::None && iq_count_ >= cfg_.iq_entries)
    return blocked(stats_.stall_iq);
  if (in.is_load() && lq_count_ >= cfg_.lq_entries)
    return blocked(stats_.stall_lq);
  if (in.is_store() && sq_count_ >= cfg_.sq_entries)
    return blocked(stats_.stall_sq);
  std::size_t need_int = 0, need_vec = 0;
  for (const auto& r : in.dst) {
    if (r.cls == RegClass::Vec)
      ++need_vec;
    else if (r.cls == RegClass::Int && in.origin == isa::Origin::FrontEnd)
      ++need_int;
  }
  if (ints_.free_count() < need_int)
    return blocked(stats_.stall_int_regs);
  if (vecs_.free_count() < need_vec)
    return blocked(stats_.stall_vec_regs);
  return true;
}

void Core::rename(DynInst& d)
{
  const bool sensor = d.in.origin == isa::Origin::Sensor;
  auto int_src = [&](uint8_t idx) -> int16_t {
    if (!sensor)
      return ints_.map(idx);
    return idx == kCrsBaseSlot ? sensor_.crs_base_phys : sensor_.param_phys.at(idx);
  };
  for (std::size_t i = 0; i < d.in.src.size(); ++i) {
    const auto& r = d.in.src[i];
    if (r.cls == RegClass::Int)
      d.psrc[i] = int_src(r.idx);
    else if (r.cls == RegClass::Vec)
      d.psrc[i] = vecs_.map(r.idx);
  }
  for (std::size_t i = 0; i < d.in.dst.size(); ++i) {
    const auto& r = d.in.dst[i];
    if (r.cls == RegClass::Vec) {
      d.old_pdst[i] = vecs_.map(r.idx);
      d.pdst[i] = *vecs_.allocate();
      vecs_.set_map(r.idx, d.pdst[i]);
    } else if (r.cls == RegClass::Int) {
      if (sensor) {
        // parameter loads write the sensor's own registers; nothing to unmap
        d.pdst[i] = sensor_.param_phys.at(r.idx);
        ints_.set_state(d.pdst[i], PhysState::Pending);
        ints_.ready_cycle(d.pdst[i]) = ints_.acc_ready_cycle(d.pdst[i]) = UINT64_MAX;
      } else {
        d.old_pdst[i] = ints_.map(r.idx);
        d.pdst[i] = *ints_.allocate();
        ints_.set_map(r.idx, d.pdst[i]);
      }
    }
  }
}

Core::DynInst& Core::dispatch(DynInst d)
{
  d.in.seq = next_seq_++;
  rename(d);
  ++stats_.dispatched;
  if (d.in.origin == isa::Origin::FrontEnd)
    ++stats_.renamed;
  if (fu_of(d.in.op) == Fu::None) {
    d.issued = true;
    d.ready_cycle = now_;
  } else {
    ++iq_count_;
  }
  if (d.in.is_load())
    ++lq_count_;
  if (d.in.is_store())
    ++sq_count_;
  rob_.push_back(d);
  return rob_.back();
}

void Core::rename_dispatch()
{
  for (std::size_t n = 0; n < std::min(cfg_.rename_width, cfg_.dispatch_width); ++n) {
    if (dq_.empty() || dq_.front().decode_cycle >= now_ || !can_dispatch(dq_.front().in))
      break;
    DynInst& d = dispatch(dq_.front());
    dq_.pop_front();
    if (d.in.op == Opcode::Crs) {
      sensor_.crs_seq = d.in.seq;
      sensor_.crs_base_phys = d.psrc[0];
    }
  }
}

// -- execution --

bool Core::operands_ready(const DynInst& d) const
{
  for (std::size_t i = 0; i < d.in.src.size(); ++i) {
    const auto cls = d.in.src[i].cls;
    if (cls == RegClass::None)
      continue;
    const int16_t p = d.psrc[i];
    if (p == kNoPhys)
      continue; // unmapped sensor-side tag reads as zero
    const uint64_t r = cls == RegClass::Int ? ints_.ready_cycle(p)
                                            : vecs_.ready_cycle(p);
    if (r > now_)
      return false;
  }
  if (d.in.reads_dst())
    for (std::size_t i = 0; i < d.in.dst.size(); ++i) {
      const int16_t p = d.old_pdst[i];
      if (d.in.dst[i].cls != RegClass::Vec || p == kNoPhys)
        continue;
      if (vecs_.acc_ready_cycle(p) > now_)
        return false;
    }
  return true;
}

Core::LoadCheck Core::check_load(std::size_t idx, isa::VecValue& fwd) const
{
  const DynInst& ld = rob_[idx];
  const isa::Operands ops{{ints_.value(ld.psrc[0]), 0, 0}, {}, {}};
  const uint64_t addr = isa::effective_address(ld.in, ops);
  const std::size_t bytes = ld.in.mem_bytes();
  for (std::size_t j = idx; j-- > 0;) {
    const DynInst& st = rob_[j];
    if (!st.in.is_store())
      continue;
    uint64_t sa = st.addr;
    if (!st.issued) {
      // the address is known once the base register is, even without the data
      const int16_t base = st.psrc[1];
      if (ints_.ready_cycle(base) > now_)
        return LoadCheck::Wait;
      sa = ints_.value(base) + static_cast<uint64_t>(st.in.imm);
    }
    if (sa + kVecBytes <= addr || addr + bytes <= sa)
      continue;
    if (!st.issued)
      return LoadCheck::Wait; // overlapping store still waiting for its data
    if (sa <= addr && addr + bytes <= sa + kVecBytes) {
      std::memcpy(fwd.bytes.data(), st.store_data.bytes.data() + (addr - sa), bytes);
      return LoadCheck::Forward;
    }
    return LoadCheck::Wait; // partial overlap: wait for the store to reach memory
  }
  return LoadCheck::Memory;
}

void Core::execute(DynInst& d, bool forwarded, const isa::VecValue& fwd)
{
  const auto& in = d.in;
  isa::Operands ops;
  for (std::size_t i = 0; i < in.src.size(); ++i) {
    if (d.psrc[i] == kNoPhys)
      continue;
    if (in.src[i].cls == RegClass::Int)
      ops.ints[i] = ints_.value(d.psrc[i]);
    else if (in.src[i].cls == RegClass::Vec)
      ops.vecs[i] = vecs_.value(d.psrc[i]);
    ++stats_.rf_reads;
  }
  if (in.reads_dst())
    for (std::size_t i = 0; i < in.dst.size(); ++i)
      if (in.dst[i].cls == RegClass::Vec && d.old_pdst[i] != kNoPhys) {
        ops.dst_old[i] = vecs_.value(d.old_pdst[i]);
        ++stats_.rf_reads;
      }

  isa::Effects e = isa::execute_alu(in, ops);
  uint64_t ready = now_ + 1;
  const Fu fu = fu_of(in.op);

  switch (fu) {
  case Fu::Int:
    ++stats_.int_alu_ops;
    ready = now_ + cfg_.int_alu_latency + (in.op == Opcode::CopyIndexed ? 1 : 0);
    break;
  case Fu::Vec:
    ++stats_.vec_fu_ops;
    ready = now_ + (is_mac(in.op) ? cfg_.vec_mac_latency : cfg_.vec_alu_latency);
    break;
  case Fu::Load: {
    d.addr = e.address;
    const std::size_t bytes = in.mem_bytes();
    std::array<uint8_t, kVecBytes> raw{};
    if (forwarded) {
      std::memcpy(raw.data(), fwd.bytes.data(), bytes);
      ++stats_.store_forwards;
      ready = now_ + cfg_.l1_latency;
    } else if (mem_.contains(d.addr, bytes)) {
      mem_.read(d.addr, std::span(raw.data(), bytes));
      ready = caches_.data_access(d.addr, bytes, now_, d.prefetch_key);
    } else {
      d.mem_fault = true; // only raised if this load commits
      ready = now_ + cfg_.l1_latency;
    }
    if (in.op == Opcode::LdScalar) {
      uint64_t v = 0;
      for (std::size_t i = 0; i < 8; ++i)
        v |= static_cast<uint64_t>(raw[i]) << (8 * i);
      e.ints[0] = v;
    } else {
      e.vecs[0] = isa::load_value(in, raw.data());
    }
    break;
  }
  case Fu::Store:
    d.addr = e.address;
    d.store_data = ops.vecs[0];
    d.mem_fault = !mem_.contains(d.addr, kVecBytes);
    break;
  case Fu::None: break;
  }

  const bool forward_acc = cfg_.mac_accumulator_forwarding && is_mac(in.op);
  for (std::size_t i = 0; i < in.dst.size(); ++i) {
    const int16_t p = d.pdst[i];
    if (p == kNoPhys)
      continue;
    ++stats_.rf_writes;
    if (in.dst[i].cls == RegClass::Int) {
      ints_.value(p) = e.ints[i];
      ints_.ready_cycle(p) = ints_.acc_ready_cycle(p) = ready;
    } else {
      vecs_.value(p) = e.vecs[i];
      vecs_.ready_cycle(p) = ready;
      vecs_.acc_ready_cycle(p) = forward_acc ? now_ + 1 : ready;
    }
  }
  d.result = e.vecs[0];
  d.issued = true;
  d.ready_cycle = ready;
  ++stats_.issued;
  --iq_count_;
}

void Core::issue()
{
  std::size_t issued = 0;
  std::array<std::size_t, 5> used{};
  const std::array<std::size_t, 5> limit{0, cfg_.int_alus, cfg_.vec_fus, cfg_.load_ports, cfg_.store_ports};
  for (std::size_t i = 0; i < rob_.size() && issued < cfg_.issue_width; ++i) {
    DynInst& d = rob_[i];
    if (d.issued)
      continue;
    const auto fu = static_cast<std::size_t>(fu_of(d.in.op));
    if (used[fu] >= limit[fu] || !operands_ready(d))
      continue;
    isa::VecValue fwd;
    bool forwarded = false;
    if (d.in.is_load()) {
      const LoadCheck c = check_load(i, fwd);
      if (c == LoadCheck::Wait)
        continue;
      forwarded = c == LoadCheck::Forward;
    }
    execute(d, forwarded, fwd);
    ++used[fu];
    ++issued;
  }
}

void Core::complete()
{
  for (std::size_t i = 0; i < rob_.size(); ++i) {
    DynInst& d = rob_[i];
    if (d.completed || !d.issued || d.ready_cycle > now_)
      continue;
    d.completed = true;
    for (std::size_t k = 0; k < d.in.dst.size(); ++k) {
      if (d.pdst[k] == kNoPhys)
        continue;
      if (d.in.dst[k].cls == RegClass::Int)
        ints_.set_state(d.pdst[k], PhysState::Ready);
      else
        vecs_.set_state(d.pdst[k], PhysState::Ready);
    }
    if (d.delta_sub && !cfg_.delta_ready_at_commit)
      sensor_.deltas[d.in.seq] = d.result;
    if (d.in.op == Opcode::Branch && d.mispredict) {
      // Resolution: discard everything younger and restart fetch on the correct path.
      const uint64_t resume = std::max(now_ + 1, d.fetch_cycle + cfg_.mispredict_penalty);
      stats_.squash_cycles += resume - d.fetch_cycle;
      ++stats_.mispredicts;
      const uint64_t seq = d.in.seq;
      d.mispredict = false;
      squash_from(seq + 1);
      stats_.squashed += fq_.size() + dq_.size();
      fq_.clear();
      dq_.clear();
      // a CRS decoded on the wrong path never reached the ROB
      if (sensor_.phase == SensorPhase::Preparing &&
          std::none_of(rob_.begin(), rob_.end(), [](const DynInst& e) { return e.in.op == Opcode::Crs; })) {
        sensor_.set_phase(SensorPhase::Idle);
        decode_blocked_ = false;
      }
      wrong_path_ = false;
      fetch_resume_ = resume;
      return; // younger entries are gone
    }
  }
}

void Core::release_dsts(DynInst& d)
{
  for (std::size_t k = d.in.dst.size(); k-- > 0;) {
    const auto cls = d.in.dst[k].cls;
    if (cls == RegClass::None || d.pdst[k] == kNoPhys)
      continue;
    if (cls == RegClass::Vec) {
      vecs_.set_map(d.in.dst[k].idx, d.old_pdst[k]);
      vecs_.release(d.pdst[k]);
    } else if (d.in.origin == isa::Origin::FrontEnd) {
      ints_.set_map(d.in.dst[k].idx, d.old_pdst[k]);
      ints_.release(d.pdst[k]);
    } else {
      ints_.set_state(d.pdst[k], PhysState::Pending); // sensor parameter register stays owned
    }
  }
}

void Core::squash_from(uint64_t seq)
{
  while (!rob_.empty() && rob_.back().in.seq >= seq) {
    DynInst& d = rob_.back();
    release_dsts(d);
    if (!d.issued)
      --iq_count_;
    if (d.in.is_load())
      --lq_count_;
    if (d.in.is_store())
      --sq_count_;
    if (d.in.op == Opcode::Crs && sensor_.phase == SensorPhase::Preparing && sensor_.crs_seq == d.in.seq) {
      sensor_.set_phase(SensorPhase::Idle);
      decode_blocked_ = false;
    }
    ++stats_.squashed;
    rob_.pop_back();
  }
}

// -- commit --

void Core::commit()
{
  for (std::size_t n = 0; n < cfg_.commit_width && !rob_.empty(); ++n) {
    DynInst& d = rob_.front();
    if (!d.completed || d.in.op == Opcode::Crs)
      break; // the CRS leaves the ROB through the ReuseSensor
    const bool sensor = d.in.origin == isa::Origin::Sensor;

    if (d.inject_fault) {
      d.inject_fault = false;
      const uint64_t seq = d.in.seq;
      ++stats_.rollbacks;
      squash_from(seq);
      sensor_.rollback(seq);
      if (sensor_.phase == SensorPhase::Finishing)
        sensor_.set_phase(SensorPhase::KernelGen);
      break;
    }
    if (d.mem_fault)
      throw SimulationFault("access outside the memory image at commit: " + isa::disassemble(d.in) +
                            " address " + std::to_string(d.addr));

    if (d.in.is_store()) {
      mem_.write(d.addr, d.store_data.bytes);
      caches_.data_access(d.addr, kVecBytes, now_, d.prefetch_key);
      --sq_count_;
    }
    if (d.in.is_load())
      --lq_count_;
    if (d.in.op == Opcode::Branch) {
      ++stats_.branches;
      if (d.in.fn != isa::fn::kAlways)
        bp_.update(d.pc, d.taken);
    }
    if (sensor && d.in.op == Opcode::LdScalar) {
      const uint8_t slot = d.in.dst[0].idx;
      sensor_.param_values[slot] = ints_.value(d.pdst[0]);
      sensor_.params_known |= static_cast<uint8_t>(1u << slot);
    }
    if (sensor && d.in.op == Opcode::SubVec8) {
      if (cfg_.delta_ready_at_commit)
        sensor_.deltas[d.in.seq] = d.result;
      // older deltas can no longer be needed by a rollback
      sensor_.deltas.erase(sensor_.deltas.begin(), sensor_.deltas.lower_bound(d.in.seq));
    }
    for (std::size_t k = 0; k < d.in.dst.size(); ++k) {
      if (d.old_pdst[k] == kNoPhys)
        continue;
      if (d.in.dst[k].cls == RegClass::Vec)
        vecs_.release(d.old_pdst[k]);
      else if (d.in.dst[k].cls == RegClass::Int)
        ints_.release(d.old_pdst[k]);
    }
    const auto org = static_cast<std::size_t>(d.in.origin);
    ++stats_.committed;
    ++stats_.committed_by_origin[org];
    ++stats_.committed_by_class[org][static_cast<std::size_t>(classify(d.in.op))];
    if (sensor) {
      sensor_.on_commit(d.in.seq);
      sensor_.last_generated_commit = now_;
    }
    rob_.pop_front();
  }
}

// -- ReuseSensor --

void Core::commit_crs()
{
  const uint64_t travel = 2; // decode -> dispatch -> commit of a lone CRS
  const uint64_t waited = now_ - sensor_.crs_decode_cycle;
  stats_.drain_cycles += waited > travel ? waited - travel : 0;
  ++stats_.committed;
  ++stats_.committed_by_origin[0];
  ++stats_.committed_by_class[0][static_cast<std::size_t>(InstClass::Other)];
  rob_.pop_front();

  sensor_.scratchpad.take(vecs_);
  stats_.scratchpad_accesses += vecs_.phys_size();
  vecs_.clear_all();
  for (auto& p : sensor_.param_phys) {
    auto r = ints_.allocate();
    if (!r)
      throw SimulationFault("ReuseSensor: no integer registers for the parameter table");
    p = *r;
  }
  sensor_.params_known = 0;
  sensor_.params_emitted = 0;
  sensor_.history.clear();
  sensor_.deltas.clear();
  sensor_.awaited_delta.reset();
  sensor_.set_phase(SensorPhase::GenerateParams);
}

void Core::finish_sensor()
{
  sensor_.scratchpad.restore_into(vecs_);
  stats_.scratchpad_accesses += vecs_.phys_size();
  for (auto p : sensor_.param_phys)
    ints_.release(p);
  const GenCounters& c = sensor_.gen.counters();
  stats_.generated_weight_loads += c.weight_loads;
  stats_.generated_mla8 += c.mla8;
  stats_.overflow_split_extra += c.overflow_extra;
  stats_.skipped_weight_loads += c.skipped_weight_loads;
  stats_.skipped_computes += c.skipped_computes;
  stats_.restore_cycles += cfg_.sensor_restore_cycles;
  stats_.sensor_operating_cycles += now_ - sensor_.activation_cycle;
  ++stats_.sensor_activations;
  sensor_.set_phase(SensorPhase::Idle);
  sensor_.reset();
  decode_blocked_ = false;
}

void Core::sensor_tick()
{
  switch (sensor_.phase) {
  case SensorPhase::Idle: return;

  case SensorPhase::Preparing:
    if (!rob_.empty() && rob_.front().in.seq == sensor_.crs_seq && rob_.front().in.op == Opcode::Crs &&
        rob_.front().completed)
      commit_crs();
    return;

  case SensorPhase::GenerateParams:
    for (std::size_t n = 0; n < cfg_.sensor_gen_width && sensor_.params_emitted < kParamSlots; ++n) {
      const auto slot = static_cast<uint8_t>(sensor_.params_emitted);
      isa::Instruction in = isa::ld_scalar(isa::x(slot), isa::x(kCrsBaseSlot), 8 * slot);
      in.origin = isa::Origin::Sensor;
      if (!can_dispatch(in))
        break;
      DynInst d;
      d.in = in;
      d.prefetch_key = kSensorKeyBase;
      dispatch(d);
      ++sensor_.params_emitted;
      ++stats_.generated;
      ++stats_.param_loads;
    }
    if (sensor_.params_complete()) {
      std::vector<uint8_t> block(kParamBlockBytes);
      for (std::size_t i = 0; i < kParamSlots; ++i)
        for (std::size_t b = 0; b < 8; ++b)
          block[8 * i + b] = static_cast<uint8_t>(sensor_.param_values[i] >> (8 * b));
      sensor_.layer = decode_param_block(block);
      sensor_.gen = KernelGenerator(sensor_.layer, cfg_.sensor_tile_groups, cfg_.sensor_tags_per_class);
      sensor_.set_phase(sensor_.gen.done() ? SensorPhase::Finishing : SensorPhase::KernelGen);
    }
    return;

  case SensorPhase::KernelGen:
    for (std::size_t n = 0; n < cfg_.sensor_gen_width; ++n) {
      KernelGenerator next_gen = sensor_.gen;
      const KernelGenerator::Next nx = next_gen.next(sensor_.current_delta());
      if (nx.status == KernelGenerator::Status::Done) {
        sensor_.gen = next_gen;
        sensor_.set_phase(SensorPhase::Finishing);
        break;
      }
      if (nx.status == KernelGenerator::Status::NeedDelta) {
        ++stats_.sensor_stall_delta;
        break;
      }
      if (!can_dispatch(nx.in)) {
        ++stats_.sensor_stall_resources;
        break;
      }
      DynInst d;
      d.in = nx.in;
      d.delta_sub = nx.delta_sub;
      d.prefetch_key = kSensorKeyBase + nx.slot;
      if (opts_.inject_fault_at && !fault_injected_ && d.in.is_mem() && kernel_dispatched_ >= *opts_.inject_fault_at) {
        d.inject_fault = true;
        fault_injected_ = true;
      }
      const uint64_t seq = dispatch(d).in.seq;
      sensor_.history.push_back({seq, sensor_.gen, sensor_.awaited_delta, sensor_.params_known});
      sensor_.gen = next_gen;
      if (nx.delta_sub)
        sensor_.awaited_delta = seq;
      ++kernel_dispatched_;
      ++stats_.generated;
    }
    return;

  case SensorPhase::Finishing:
    if (rob_.empty()) {
      sensor_.set_phase(SensorPhase::Restoring);
      sensor_.restore_done_cycle = now_ + cfg_.sensor_restore_cycles;
    }
    return;

  case SensorPhase::Restoring:
    if (now_ >= sensor_.restore_done_cycle)
      finish_sensor();
    return;
  }
}

} // namespace rsim
