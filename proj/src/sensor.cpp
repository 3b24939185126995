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

#include "rsim/sensor.hpp"

#include <algorithm>

#include "rsim/kernels.hpp"

namespace rsim {

std::string_view to_string(SensorPhase p)
{
  switch (p) {
  case SensorPhase::Idle: return "idle";
  case SensorPhase::Preparing: return "preparing";
  case SensorPhase::GenerateParams: return "generate-params";
  case SensorPhase::KernelGen: return "kernel-gen";
  case SensorPhase::Finishing: return "finishing";
  case SensorPhase::Restoring: return "restoring";
  }
  return "?";
}

bool legal_transition(SensorPhase from, SensorPhase to)
{
  using P = SensorPhase;
  switch (from) {
  case P::Idle: return to == P::Preparing;
  case P::Preparing: return to == P::GenerateParams || to == P::Idle;
  case P::GenerateParams: return to == P::KernelGen || to == P::Finishing;
  case P::KernelGen: return to == P::Finishing;
  case P::Finishing: return to == P::Restoring || to == P::KernelGen; // KernelGen only on rollback
  case P::Restoring: return to == P::Idle;
  }
  return false;
}

int16_t delta_lane(const isa::VecValue& v, std::size_t k)
{
  const int16_t d = v.i8(k);
  if (!(v.flags >> k & 1u))
    return d;
  return static_cast<int16_t>(d < 0 ? d + 256 : d - 256);
}

KernelGenerator::KernelGenerator(const LayerSpec& layer, std::size_t tile_groups, std::size_t tags_per_class)
    : layer_(layer), reuse_(layer.kernel_mode == KernelMode::Reuse),
      input_stationary_(layer.dataflow == Dataflow::InputStationary), tile_(std::clamp<std::size_t>(tile_groups, 1, 4)),
      tags_(std::clamp<std::size_t>(tags_per_class, 1, 4)), groups_(ceil_div(layer.output_len, 16)),
      chunks_(ceil_div(layer.input_len, 16)), row_bytes_(pad16(layer.output_len))
{
  if (layer.input_len == 0 || layer.output_len == 0)
    stage_ = Stage::Done;
  else
    stage_ = input_stationary_ ? Stage::ChunkBegin : Stage::TileBegin;
}

std::size_t KernelGenerator::lanes(std::size_t chunk) const
{
  return std::min<std::size_t>(16, layer_.input_len - 16 * chunk);
}

std::size_t KernelGenerator::tile_size() const { return std::min(tile_, groups_ - g0_); }

uint8_t KernelGenerator::tag(uint8_t cls, uint32_t rot) const
{
  return static_cast<uint8_t>(cls * tags_ + rot % tags_);
}

KernelGenerator::Next KernelGenerator::emit(isa::Instruction in, uint32_t slot)
{
  in.origin = isa::Origin::Sensor;
  ++counters_.emitted;
  Next n;
  n.status = Status::Emit;
  n.in = in;
  n.slot = slot;
  return n;
}

void KernelGenerator::end_tile()
{
  g0_ += tile_;
  stage_ = Stage::TileBegin;
}

KernelGenerator::Next KernelGenerator::next(const isa::VecValue* delta)
{
  using namespace isa;
  const Reg p_in = x(kSlotInputAddr), p_w = x(kSlotWeightAddr), p_out = x(kSlotOutputAddr), p_prev = x(kSlotPrevAddr);

  for (;;) {
    switch (stage_) {
    case Stage::Done: return Next{};

    case Stage::TileBegin:
      if (g0_ >= groups_) {
        if (input_stationary_) {
          ++chunk_;
          stage_ = Stage::ChunkBegin;
        } else {
          stage_ = Stage::Done;
        }
        continue;
      }
      r_ = 0;
      stage_ = Stage::AccInit;
      continue;

    case Stage::AccInit: {
      const std::size_t n = tile_size();
      const bool load = reuse_ || (input_stationary_ && chunk_ > 0);
      if (load && r_ < 4 * n) {
        const std::size_t r = r_++;
        return emit(ld_vec(acc(r), p_out, static_cast<int64_t>(64 * g0_ + 16 * r)), 4);
      }
      if (!load && r_ < n) {
        const std::size_t g = r_++;
        return emit(vzero({acc(4 * g), acc(4 * g + 1), acc(4 * g + 2), acc(4 * g + 3)}), 5);
      }
      if (input_stationary_) {
        stage_ = Stage::LanesStart;
      } else {
        chunk_ = 0;
        stage_ = Stage::ChunkBegin;
      }
      continue;
    }

    case Stage::ChunkBegin:
      if (chunk_ >= chunks_) {
        if (input_stationary_) {
          stage_ = Stage::Done;
        } else {
          r_ = 0;
          stage_ = Stage::Store;
        }
        continue;
      }
      in_tag_ = tag(0, rot_);
      prev_tag_ = tag(1, rot_);
      delta_tag_ = tag(2, rot_);
      ++rot_;
      stage_ = reuse_ ? Stage::LoadPrev : Stage::ChunkCheck;
      return emit(ld_vec(z(in_tag_), p_in, static_cast<int64_t>(16 * chunk_)), 1);

    case Stage::LoadPrev:
      stage_ = Stage::Sub;
      return emit(ld_vec(z(prev_tag_), p_prev, static_cast<int64_t>(16 * chunk_)), 2);

    case Stage::Sub: {
      stage_ = Stage::ChunkCheck;
      Next n = emit(sub_vec8(z(delta_tag_), z(in_tag_), z(prev_tag_)), 3);
      n.delta_sub = true;
      return n;
    }

    case Stage::ChunkCheck:
      if (input_stationary_) {
        if (reuse_) {
          if (!delta)
            return Next{Status::NeedDelta, {}, false, 0};
          bool any = false;
          for (std::size_t k = 0; k < lanes(chunk_); ++k)
            any = any || delta_lane(*delta, k) != 0;
          if (!any) {
            counters_.skipped_weight_loads += lanes(chunk_) * groups_;
            counters_.skipped_computes += lanes(chunk_) * groups_;
            ++chunk_;
            stage_ = Stage::ChunkBegin;
            continue;
          }
        }
        g0_ = 0;
        stage_ = Stage::TileBegin;
      } else {
        stage_ = Stage::LanesStart;
      }
      continue;

    case Stage::LanesStart:
      k_ = g_ = part_ = 0;
      stage_ = Stage::Lanes;
      continue;

    case Stage::Lanes: {
      const std::size_t n = tile_size();
      if (k_ >= lanes(chunk_)) {
        if (input_stationary_) {
          r_ = 0;
          stage_ = Stage::Store;
        } else {
          ++chunk_;
          stage_ = Stage::ChunkBegin;
        }
        continue;
      }
      int16_t d = 0;
      if (reuse_) {
        if (!delta)
          return Next{Status::NeedDelta, {}, false, 0};
        d = delta_lane(*delta, k_);
        if (d == 0) {
          counters_.skipped_weight_loads += n;
          counters_.skipped_computes += n;
          ++k_;
          continue;
        }
      }
      if (part_ == 0) {
        w_tag_ = tag(3, static_cast<uint32_t>(counters_.weight_loads));
        ++counters_.weight_loads;
        part_ = 1;
        const int64_t off = static_cast<int64_t>((16 * chunk_ + k_) * row_bytes_ + 16 * (g0_ + g_));
        return emit(ld_vec(z(w_tag_), p_w, off), static_cast<uint32_t>(16 + g_));
      }
      const std::array<Reg, 4> a{acc(4 * g_), acc(4 * g_ + 1), acc(4 * g_ + 2), acc(4 * g_ + 3)};
      Instruction in;
      std::size_t parts = 1;
      if (!reuse_) {
        in = mla8(a, z(w_tag_), z(in_tag_), static_cast<uint8_t>(k_));
      } else if (d >= -128 && d <= 127) {
        in = mla8(a, z(w_tag_), z(delta_tag_), static_cast<uint8_t>(k_));
      } else {
        const DeltaSplit split = split_overflow(d);
        parts = split.count;
        in = mla8_imm(a, z(w_tag_), split.parts[part_ - 1]);
        if (part_ > 1)
          ++counters_.overflow_extra;
      }
      ++counters_.mla8;
      if (part_ >= parts) {
        part_ = 0;
        if (++g_ == n) {
          g_ = 0;
          ++k_;
        }
      } else {
        ++part_;
      }
      return emit(in, 32);
    }

    case Stage::Store: {
      const std::size_t n = tile_size();
      if (r_ < 4 * n) {
        const std::size_t r = r_++;
        return emit(st_vec(acc(r), p_out, static_cast<int64_t>(64 * g0_ + 16 * r)), 48);
      }
      end_tile();
      continue;
    }
    }
  }
}

void SensorState::set_phase(SensorPhase next)
{
  if (!legal_transition(phase, next))
    throw SimulationFault("ReuseSensor: illegal phase transition " + std::string(to_string(phase)) + " -> " +
                          std::string(to_string(next)));
  phase = next;
}

const isa::VecValue* SensorState::current_delta() const
{
  if (!awaited_delta)
    return nullptr;
  auto it = deltas.find(*awaited_delta);
  return it == deltas.end() ? nullptr : &it->second;
}

void SensorState::rollback(uint64_t seq)
{
  auto it = std::find_if(history.begin(), history.end(), [&](const HistoryEntry& e) { return e.seq == seq; });
  if (it == history.end())
    throw SimulationFault("ReuseSensor: no state history entry for seq " + std::to_string(seq));
  gen = it->gen;
  awaited_delta = it->awaited_delta;
  params_known = it->params_known;
  history.erase(it, history.end());
  deltas.erase(deltas.lower_bound(seq), deltas.end());
}

void SensorState::on_commit(uint64_t seq)
{
  while (!history.empty() && history.front().seq <= seq)
    history.pop_front();
}

void SensorState::reset()
{
  SensorState fresh;
  *this = std::move(fresh);
}

} // namespace rsim
