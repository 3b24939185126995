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

#include "rsim/machine.hpp"

#include <cstring>
#include <string>

#include "rsim/tensors.hpp"

namespace rsim {

namespace {

[[noreturn]] void out_of_range(uint64_t addr, std::size_t len, std::size_t size)
{
  throw SimulationFault("memory access [" + std::to_string(addr) + ", +" + std::to_string(len) +
                        ") outside image of " + std::to_string(size) + " bytes");
}

} // namespace

void MemoryImage::read(uint64_t addr, std::span<uint8_t> out) const
{
  if (!contains(addr, out.size()))
    out_of_range(addr, out.size(), size());
  std::memcpy(out.data(), bytes_.data() + addr, out.size());
}

void MemoryImage::write(uint64_t addr, std::span<const uint8_t> in)
{
  if (!contains(addr, in.size()))
    out_of_range(addr, in.size(), size());
  std::memcpy(bytes_.data() + addr, in.data(), in.size());
}

uint64_t MemoryImage::read_u64(uint64_t addr) const
{
  std::array<uint8_t, 8> b{};
  read(addr, b);
  uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i)
    v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

void MemoryImage::write_u64(uint64_t addr, uint64_t v)
{
  std::array<uint8_t, 8> b{};
  for (std::size_t i = 0; i < 8; ++i)
    b[i] = static_cast<uint8_t>(v >> (8 * i));
  write(addr, b);
}

int32_t MemoryImage::read_i32(uint64_t addr) const
{
  std::array<uint8_t, 4> b{};
  read(addr, b);
  uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return static_cast<int32_t>(v);
}

void MemoryImage::write_i32(uint64_t addr, int32_t v)
{
  std::array<uint8_t, 4> b{};
  for (std::size_t i = 0; i < 4; ++i)
    b[i] = static_cast<uint8_t>(static_cast<uint32_t>(v) >> (8 * i));
  write(addr, b);
}

void VecSnapshot::take(const VecBank& bank) { saved_ = bank.snapshot(); }

void VecSnapshot::restore_into(VecBank& bank)
{
  if (!saved_)
    throw Error("restore_vec_state: no snapshot to restore");
  bank.restore(*saved_);
  saved_.reset();
}

void execute_crs(MemoryImage& mem, uint64_t param_addr)
{
  std::vector<uint8_t> block(kParamBlockBytes);
  mem.read(param_addr, block);
  const LayerSpec layer = decode_param_block(block);
  if (layer.input_len == 0 || layer.output_len == 0)
    return;
  const std::size_t out = pad16(layer.output_len);
  const bool reuse = layer.kernel_mode == KernelMode::Reuse;

  std::vector<int32_t> acc(out, 0);
  if (reuse)
    for (std::size_t o = 0; o < out; ++o)
      acc[o] = mem.read_i32(layer.output_addr + 4 * o);

  std::vector<uint8_t> x(layer.input_len), xp(layer.input_len), row(out);
  mem.read(layer.input_addr, x);
  if (reuse)
    mem.read(layer.prev_input_addr, xp);
  for (std::size_t i = 0; i < layer.input_len; ++i) {
    const int32_t s = reuse ? static_cast<int8_t>(x[i]) - static_cast<int8_t>(xp[i]) : static_cast<int8_t>(x[i]);
    if (s == 0)
      continue;
    mem.read(layer.weight_addr + i * out, row);
    for (std::size_t o = 0; o < out; ++o)
      acc[o] = wrap_add32(acc[o], static_cast<int32_t>(static_cast<int8_t>(row[o])) * s);
  }
  for (std::size_t o = 0; o < out; ++o)
    mem.write_i32(layer.output_addr + 4 * o, acc[o]);
}

Interpreter::Interpreter(const isa::Program& program, MemoryImage memory)
    : program_(&program), mem_(std::move(memory))
{
}

Interpreter::Step Interpreter::step()
{
  using isa::Opcode;
  const isa::Instruction& in = program_->code.at(pc_);
  Step s{pc_, pc_ + 1, false};

  isa::Operands ops;
  for (std::size_t i = 0; i < in.src.size(); ++i) {
    if (in.src[i].cls == isa::RegClass::Int)
      ops.ints[i] = ints_[in.src[i].idx];
    else if (in.src[i].cls == isa::RegClass::Vec)
      ops.vecs[i] = vecs_[in.src[i].idx];
  }
  for (std::size_t d = 0; d < in.dst.size(); ++d)
    if (in.dst[d].cls == isa::RegClass::Vec)
      ops.dst_old[d] = vecs_[in.dst[d].idx];

  const isa::Effects e = isa::execute_alu(in, ops);
  switch (in.op) {
  case Opcode::LdScalar:
    ints_[in.dst[0].idx] = mem_.read_u64(e.address);
    break;
  case Opcode::LdVec: {
    std::array<uint8_t, kVecBytes> raw{};
    mem_.read(e.address, std::span(raw.data(), in.mem_bytes()));
    vecs_[in.dst[0].idx] = isa::load_value(in, raw.data());
    break;
  }
  case Opcode::StVec:
    mem_.write(e.address, ops.vecs[0].bytes);
    break;
  case Opcode::Crs:
    execute_crs(mem_, ops.ints[0]);
    break;
  case Opcode::Branch:
    if (e.branch_taken) {
      s.taken = true;
      s.next_pc = static_cast<uint64_t>(in.imm);
    }
    break;
  case Opcode::Nop:
    break;
  default:
    for (std::size_t d = 0; d < in.dst.size(); ++d) {
      if (in.dst[d].cls == isa::RegClass::Int)
        ints_[in.dst[d].idx] = e.ints[d];
      else if (in.dst[d].cls == isa::RegClass::Vec)
        vecs_[in.dst[d].idx] = e.vecs[d];
    }
    break;
  }
  pc_ = s.next_pc;
  return s;
}

uint64_t Interpreter::run(uint64_t max_steps)
{
  uint64_t n = 0;
  while (!done()) {
    if (n++ >= max_steps)
      throw Error("Interpreter: step limit exceeded");
    step();
  }
  return n;
}

} // namespace rsim
