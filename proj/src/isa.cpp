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

#include "rsim/isa.hpp"

#include <charconv>
#include <cstring>
#include <sstream>

#include "rsim/kernels.hpp"

namespace rsim::isa {

namespace {

std::size_t count_valid(const auto& regs)
{
  std::size_t n = 0;
  for (const auto& r : regs)
    n += r.valid();
  return n;
}

} // namespace

std::size_t Instruction::num_dst() const { return count_valid(dst); }
std::size_t Instruction::num_src() const { return count_valid(src); }

bool Instruction::reads_dst() const
{
  return op == Opcode::Sdot || op == Opcode::Mla8 || (op == Opcode::VecAlu && fn == fn::kAddWiden);
}

std::size_t Instruction::mem_bytes() const
{
  switch (op) {
  case Opcode::LdScalar: return 8;
  case Opcode::LdVec: return fn == fn::kWiden8 ? 8 : 16;
  case Opcode::StVec: return 16;
  default: return 0;
  }
}

void Instruction::validate() const
{
  auto need = [&](bool ok, const char* what) {
    if (!ok)
      throw Error(std::string("invalid ") + std::string(mnemonic(op)) + ": " + what);
  };
  auto is = [](Reg r, RegClass c) { return r.cls == c; };
  for (std::size_t i = 0; i < dst.size(); ++i)
    if (dst[i].valid())
      need(dst[i].idx < (dst[i].cls == RegClass::Int ? kArchIntRegs : kArchVecRegs), "register index out of range");
  switch (op) {
  case Opcode::LdScalar: need(is(dst[0], RegClass::Int) && is(src[0], RegClass::Int), "operands"); break;
  case Opcode::LdVec: need(is(dst[0], RegClass::Vec) && is(src[0], RegClass::Int), "operands"); break;
  case Opcode::StVec: need(is(src[0], RegClass::Vec) && is(src[1], RegClass::Int) && num_dst() == 0, "operands"); break;
  case Opcode::SubVec8:
    need(is(dst[0], RegClass::Vec) && is(src[0], RegClass::Vec) && is(src[1], RegClass::Vec), "operands");
    break;
  case Opcode::Sdot:
    need(is(dst[0], RegClass::Vec) && is(src[0], RegClass::Vec) && is(src[1], RegClass::Vec) && index_k < 4,
         "operands");
    break;
  case Opcode::Mla:
    need(is(dst[0], RegClass::Vec) && is(src[0], RegClass::Vec) && is(src[1], RegClass::Vec) &&
             is(src[2], RegClass::Int),
         "operands");
    break;
  case Opcode::Mla8:
    need(num_dst() == 4, "needs exactly 4 destination registers");
    need(is(src[0], RegClass::Vec), "weights operand");
    need(fn == fn::kImmScalar || (is(src[1], RegClass::Vec) && index_k < 16), "scalar operand");
    break;
  case Opcode::CopyIndexed: need(is(dst[0], RegClass::Int) && is(src[0], RegClass::Vec), "operands"); break;
  case Opcode::Crs: need(is(src[0], RegClass::Int), "operands"); break;
  case Opcode::Branch: need(fn == fn::kAlways || is(src[0], RegClass::Int), "operands"); break;
  case Opcode::ScalarAlu: need(is(dst[0], RegClass::Int), "operands"); break;
  case Opcode::VecAlu: need(num_dst() >= 1, "operands"); break;
  case Opcode::Nop: break;
  }
  if (op != Opcode::Mla8 && op != Opcode::VecAlu)
    need(num_dst() <= 1, "at most one destination");
  // a repeated destination would be renamed twice and read its own result
  for (std::size_t i = 0; i < dst.size(); ++i)
    for (std::size_t j = i + 1; j < dst.size(); ++j)
      need(!dst[i].valid() || !(dst[i] == dst[j]), "destinations must be distinct");
}

namespace {

constexpr std::array<std::string_view, 13> kMnemonics{"ldscalar", "ldvec", "stvec", "subvec8", "sdot",
                                                      "mla",      "mla8",  "copyidx", "crs",    "branch",
                                                      "salu",     "valu",  "nop"};

void append_regs(std::ostringstream& os, const auto& regs)
{
  bool first = true;
  for (const auto& r : regs) {
    if (!r.valid())
      continue;
    os << (first ? "" : ",") << (r.cls == RegClass::Int ? 'x' : 'z') << static_cast<int>(r.idx);
    first = false;
  }
  if (first)
    os << '-';
}

template <std::size_t N>
std::array<Reg, N> parse_regs(std::string_view s)
{
  std::array<Reg, N> out{};
  if (s == "-")
    return out;
  std::size_t n = 0;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const auto tok = s.substr(0, comma);
    if (n >= N || tok.size() < 2 || (tok[0] != 'x' && tok[0] != 'z'))
      throw Error("disassembly: bad register list");
    unsigned v = 0;
    std::from_chars(tok.data() + 1, tok.data() + tok.size(), v);
    out[n++] = Reg{tok[0] == 'x' ? RegClass::Int : RegClass::Vec, static_cast<uint8_t>(v)};
    if (comma == std::string_view::npos)
      break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

} // namespace

std::string_view mnemonic(Opcode op) { return kMnemonics[static_cast<std::size_t>(op)]; }

std::optional<Opcode> parse_mnemonic(std::string_view s)
{
  for (std::size_t i = 0; i < kMnemonics.size(); ++i)
    if (kMnemonics[i] == s)
      return static_cast<Opcode>(i);
  return std::nullopt;
}

std::string disassemble(const Instruction& in)
{
  std::ostringstream os;
  os << in.seq << ' ' << mnemonic(in.op);
  if (in.fn)
    os << '.' << static_cast<int>(in.fn);
  os << ' ';
  append_regs(os, in.dst);
  os << ' ';
  append_regs(os, in.src);
  os << " k=" << static_cast<int>(in.index_k) << " imm=" << in.imm << ' '
     << (in.origin == Origin::FrontEnd ? "fe" : "rs");
  return os.str();
}

Instruction parse_disassembly(std::string_view line)
{
  std::istringstream is{std::string(line)};
  std::string seq, op, dsts, srcs, k, imm, origin;
  if (!(is >> seq >> op >> dsts >> srcs >> k >> imm >> origin))
    throw Error("disassembly: expected 7 fields");
  Instruction in;
  in.seq = std::stoull(seq);
  const auto dot = op.find('.');
  const auto opc = parse_mnemonic(std::string_view(op).substr(0, dot));
  if (!opc)
    throw Error("disassembly: unknown mnemonic " + op);
  in.op = *opc;
  if (dot != std::string::npos)
    in.fn = static_cast<uint8_t>(std::stoi(op.substr(dot + 1)));
  in.dst = parse_regs<4>(dsts);
  in.src = parse_regs<3>(srcs);
  if (k.rfind("k=", 0) != 0 || imm.rfind("imm=", 0) != 0)
    throw Error("disassembly: malformed k=/imm= fields");
  in.index_k = static_cast<uint8_t>(std::stoi(k.substr(2)));
  in.imm = std::stoll(imm.substr(4));
  if (origin != "fe" && origin != "rs")
    throw Error("disassembly: origin must be fe or rs");
  in.origin = origin == "fe" ? Origin::FrontEnd : Origin::Sensor;
  return in;
}

// -- builders --

namespace {
Instruction make(Opcode op, uint8_t f = 0)
{
  Instruction in;
  in.op = op;
  in.fn = f;
  return in;
}
} // namespace

Instruction ld_scalar(Reg dst, Reg base, int64_t offset)
{
  auto in = make(Opcode::LdScalar);
  in.dst[0] = dst;
  in.src[0] = base;
  in.imm = offset;
  return in;
}

Instruction ld_vec(Reg dst, Reg base, int64_t offset, uint8_t width)
{
  auto in = make(Opcode::LdVec, width);
  in.dst[0] = dst;
  in.src[0] = base;
  in.imm = offset;
  return in;
}

Instruction st_vec(Reg data, Reg base, int64_t offset)
{
  auto in = make(Opcode::StVec);
  in.src[0] = data;
  in.src[1] = base;
  in.imm = offset;
  return in;
}

Instruction sub_vec8(Reg dst, Reg a, Reg b)
{
  auto in = make(Opcode::SubVec8);
  in.dst[0] = dst;
  in.src = {a, b, Reg{}};
  return in;
}

Instruction sdot(Reg acc, Reg weights, Reg src1, uint8_t k, bool subtract)
{
  auto in = make(Opcode::Sdot, subtract ? fn::kSubtract : fn::kAccumulate);
  in.dst[0] = acc;
  in.src = {weights, src1, Reg{}};
  in.index_k = k;
  return in;
}

Instruction mla(Reg dst, Reg acc, Reg weights, Reg scalar)
{
  auto in = make(Opcode::Mla);
  in.dst[0] = dst;
  in.src = {acc, weights, scalar};
  return in;
}

Instruction mla8(std::array<Reg, 4> acc, Reg weights, Reg src1, uint8_t k)
{
  auto in = make(Opcode::Mla8, fn::kLaneScalar);
  in.dst = acc;
  in.src = {weights, src1, Reg{}};
  in.index_k = k;
  return in;
}

Instruction mla8_imm(std::array<Reg, 4> acc, Reg weights, int8_t scalar)
{
  auto in = make(Opcode::Mla8, fn::kImmScalar);
  in.dst = acc;
  in.src[0] = weights;
  in.imm = scalar;
  return in;
}

Instruction copy_indexed(Reg dst, Reg src, uint8_t k, uint8_t size)
{
  auto in = make(Opcode::CopyIndexed, size);
  in.dst[0] = dst;
  in.src[0] = src;
  in.index_k = k;
  return in;
}

Instruction crs(Reg param_base)
{
  auto in = make(Opcode::Crs);
  in.src[0] = param_base;
  return in;
}

Instruction branch(uint8_t cond, Reg src, int64_t target)
{
  auto in = make(Opcode::Branch, cond);
  if (cond != fn::kAlways)
    in.src[0] = src;
  in.imm = target;
  return in;
}

Instruction mov_imm(Reg dst, int64_t value)
{
  auto in = make(Opcode::ScalarAlu, fn::kMovImm);
  in.dst[0] = dst;
  in.imm = value;
  return in;
}

Instruction add_imm(Reg dst, Reg src, int64_t value)
{
  auto in = make(Opcode::ScalarAlu, fn::kAddImm);
  in.dst[0] = dst;
  in.src[0] = src;
  in.imm = value;
  return in;
}

Instruction add(Reg dst, Reg a, Reg b)
{
  auto in = make(Opcode::ScalarAlu, fn::kAdd);
  in.dst[0] = dst;
  in.src = {a, b, Reg{}};
  return in;
}

Instruction vzero(std::initializer_list<Reg> dsts)
{
  auto in = make(Opcode::VecAlu, fn::kZero);
  std::size_t i = 0;
  for (Reg r : dsts)
    in.dst.at(i++) = r;
  return in;
}

Instruction vsub_i16(Reg dst, Reg a, Reg b)
{
  auto in = make(Opcode::VecAlu, fn::kSubI16);
  in.dst[0] = dst;
  in.src = {a, b, Reg{}};
  return in;
}

Instruction vadd_widen(Reg lo, Reg hi, Reg src)
{
  auto in = make(Opcode::VecAlu, fn::kAddWiden);
  in.dst[0] = lo;
  in.dst[1] = hi;
  in.src[0] = src;
  return in;
}

Instruction nop() { return make(Opcode::Nop); }

// -- values --

int16_t VecValue::i16(std::size_t lane) const
{
  int16_t v;
  std::memcpy(&v, &bytes[2 * lane], 2);
  return v;
}

int32_t VecValue::i32(std::size_t lane) const
{
  int32_t v;
  std::memcpy(&v, &bytes[4 * lane], 4);
  return v;
}

void VecValue::set_i16(std::size_t lane, int16_t v) { std::memcpy(&bytes[2 * lane], &v, 2); }
void VecValue::set_i32(std::size_t lane, int32_t v) { std::memcpy(&bytes[4 * lane], &v, 4); }

uint64_t effective_address(const Instruction& in, const Operands& ops)
{
  const std::size_t base = in.op == Opcode::StVec ? 1 : 0;
  return ops.ints[base] + static_cast<uint64_t>(in.imm);
}

VecValue load_value(const Instruction& in, const uint8_t* bytes)
{
  VecValue v;
  if (in.fn == fn::kWiden8) {
    for (std::size_t l = 0; l < 8; ++l)
      v.set_i16(l, static_cast<int8_t>(bytes[l]));
  } else {
    std::memcpy(v.bytes.data(), bytes, kVecBytes);
  }
  return v;
}

namespace {

Vec16i8 as_i8(const VecValue& v)
{
  Vec16i8 out;
  std::memcpy(out.data(), v.bytes.data(), 16);
  return out;
}

} // namespace

Effects execute_alu(const Instruction& in, const Operands& ops)
{
  Effects e;
  switch (in.op) {
  case Opcode::LdScalar:
  case Opcode::LdVec:
  case Opcode::StVec:
    e.address = effective_address(in, ops);
    break;
  case Opcode::SubVec8: {
    auto& out = e.vecs[0];
    for (std::size_t l = 0; l < 16; ++l) {
      const int d = ops.vecs[0].i8(l) - ops.vecs[1].i8(l);
      out.bytes[l] = static_cast<uint8_t>(static_cast<int8_t>(d));
      if (d < -128 || d > 127)
        out.flags |= static_cast<uint16_t>(1u << l);
    }
    break;
  }
  case Opcode::Sdot: {
    Vec4i32 acc;
    for (std::size_t n = 0; n < 4; ++n)
      acc[n] = ops.dst_old[0].i32(n);
    const auto src1 = as_i8(ops.vecs[1]);
    sdot_op(acc, as_i8(ops.vecs[0]), std::span<const int8_t, 4>(src1.data() + 4 * in.index_k, 4),
            in.fn == fn::kSubtract);
    for (std::size_t n = 0; n < 4; ++n)
      e.vecs[0].set_i32(n, acc[n]);
    break;
  }
  case Opcode::Mla: {
    Vec8i16 acc, w;
    for (std::size_t j = 0; j < 8; ++j) {
      acc[j] = ops.vecs[0].i16(j);
      w[j] = ops.vecs[1].i16(j);
    }
    mla_op(acc, w, static_cast<int16_t>(ops.ints[2]));
    for (std::size_t j = 0; j < 8; ++j)
      e.vecs[0].set_i16(j, acc[j]);
    break;
  }
  case Opcode::Mla8: {
    Vec16i32 acc;
    for (std::size_t j = 0; j < 16; ++j)
      acc[j] = ops.dst_old[j / 4].i32(j % 4);
    const int8_t scalar = in.fn == fn::kImmScalar ? static_cast<int8_t>(in.imm) : ops.vecs[1].i8(in.index_k);
    mla8_op(acc, as_i8(ops.vecs[0]), scalar);
    for (std::size_t j = 0; j < 16; ++j)
      e.vecs[j / 4].set_i32(j % 4, acc[j]);
    break;
  }
  case Opcode::CopyIndexed: {
    const auto& v = ops.vecs[0];
    int64_t val = 0;
    switch (in.fn) {
    case fn::kByte: val = v.i8(in.index_k % 16); break;
    case fn::kHalf: val = v.i16(in.index_k % 8); break;
    case fn::kWord: val = v.i32(in.index_k % 4); break;
    default: val = v.flags; break;
    }
    e.ints[0] = static_cast<uint64_t>(val);
    break;
  }
  case Opcode::Branch:
    e.branch_taken = in.fn == fn::kAlways || (in.fn == fn::kEqz ? ops.ints[0] == 0 : ops.ints[0] != 0);
    break;
  case Opcode::ScalarAlu:
    switch (in.fn) {
    case fn::kMovImm: e.ints[0] = static_cast<uint64_t>(in.imm); break;
    case fn::kAddImm: e.ints[0] = ops.ints[0] + static_cast<uint64_t>(in.imm); break;
    default: e.ints[0] = ops.ints[0] + ops.ints[1]; break;
    }
    break;
  case Opcode::VecAlu:
    if (in.fn == fn::kSubI16) {
      for (std::size_t j = 0; j < 8; ++j)
        e.vecs[0].set_i16(j, static_cast<int16_t>(ops.vecs[0].i16(j) - ops.vecs[1].i16(j)));
    } else if (in.fn == fn::kAddWiden) {
      for (std::size_t half = 0; half < 2; ++half)
        for (std::size_t l = 0; l < 4; ++l)
          e.vecs[half].set_i32(l, wrap_add32(ops.dst_old[half].i32(l), ops.vecs[0].i16(4 * half + l)));
    }
    break; // kZero leaves the default zero values
  case Opcode::Crs:
  case Opcode::Nop:
    break;
  }
  return e;
}

} // namespace rsim::isa
