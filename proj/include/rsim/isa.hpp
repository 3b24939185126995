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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsim/common.hpp"

namespace rsim::isa {

inline constexpr std::size_t kArchIntRegs = 32;
inline constexpr std::size_t kArchVecRegs = 32;

enum class Opcode : uint8_t {
  LdScalar,    // x[dst] = u64 mem[x[src0] + imm]
  LdVec,       // z[dst] = mem[x[src0] + imm], 16 bytes (fn = VecLoad::Widen8: 8 bytes sign-extended to int16)
  StVec,       // mem[x[src1] + imm] = z[src0], 16 bytes
  SubVec8,     // z[dst] = z[src0] - z[src1] per int8 lane, wrapped, with per-lane overflow flags
  Sdot,        // z[dst] (+/-)= sdot(z[src0], z[src1] sub-vector index_k)
  Mla,         // z[dst] = z[src0] + z[src1] * x[src2]   (8 x int16)
  Mla8,        // z[dst0..dst3] += z[src0] * scalar, scalar = z[src1].b[index_k] or imm
  CopyIndexed, // x[dst] = element index_k of z[src0] (size per fn), sign-extended
  Crs,         // hand the parameter block at x[src0] to the ReuseSensor
  Branch,      // conditional on x[src0]; target pc = imm
  ScalarAlu,   // integer ops on x registers
  VecAlu,      // zeroing, int16 subtract, widening add
  Nop,
};

enum class RegClass : uint8_t { None, Int, Vec };

struct Reg
{
  RegClass cls = RegClass::None;
  uint8_t idx = 0;

  bool valid() const { return cls != RegClass::None; }
  bool operator==(const Reg&) const = default;
};

constexpr Reg x(uint8_t i) { return {RegClass::Int, i}; }
constexpr Reg z(uint8_t i) { return {RegClass::Vec, i}; }

namespace fn {
// LdVec
inline constexpr uint8_t kFull16 = 0;
inline constexpr uint8_t kWiden8 = 1;
// Sdot
inline constexpr uint8_t kAccumulate = 0;
inline constexpr uint8_t kSubtract = 1;
// Mla8
inline constexpr uint8_t kLaneScalar = 0;
inline constexpr uint8_t kImmScalar = 1;
// CopyIndexed element sizes
inline constexpr uint8_t kByte = 0;
inline constexpr uint8_t kHalf = 1;
inline constexpr uint8_t kWord = 2;
inline constexpr uint8_t kFlags = 3; // SubVec8 overflow mask
// Branch conditions
inline constexpr uint8_t kEqz = 0;
inline constexpr uint8_t kNez = 1;
inline constexpr uint8_t kAlways = 2;
// ScalarAlu
inline constexpr uint8_t kMovImm = 0; // dst = imm
inline constexpr uint8_t kAddImm = 1; // dst = src0 + imm
inline constexpr uint8_t kAdd = 2;    // dst = src0 + src1
// VecAlu
inline constexpr uint8_t kZero = 0;       // dst0..dst3 = 0
inline constexpr uint8_t kSubI16 = 1;     // dst = src0 - src1 on int16 lanes
inline constexpr uint8_t kAddWiden = 2;   // dst0 += lo4(src0) widened, dst1 += hi4(src0) widened
} // namespace fn

enum class Origin : uint8_t { FrontEnd, Sensor };

struct Instruction
{
  Opcode op = Opcode::Nop;
  uint8_t fn = 0;
  std::array<Reg, 4> dst{};
  std::array<Reg, 3> src{};
  uint8_t index_k = 0;
  int64_t imm = 0;
  uint64_t seq = 0;
  Origin origin = Origin::FrontEnd;

  std::size_t num_dst() const;
  std::size_t num_src() const;
  /// Destinations are also read (accumulating ops).
  bool reads_dst() const;
  bool is_load() const { return op == Opcode::LdScalar || op == Opcode::LdVec; }
  bool is_store() const { return op == Opcode::StVec; }
  bool is_mem() const { return is_load() || is_store(); }
  /// Memory footprint in bytes for loads and stores.
  std::size_t mem_bytes() const;

  /// Throws Error when operand classes or counts do not fit the opcode.
  void validate() const;

  bool operator==(const Instruction&) const = default;
};

std::string_view mnemonic(Opcode op);
std::optional<Opcode> parse_mnemonic(std::string_view s);

/// One line per instruction:
///   <seq> <mnemonic>[.<fn>] <dsts> <srcs> k=<index_k> imm=<imm> <fe|rs>
/// Register lists are comma separated (x3, z10) or "-" when empty.
std::string disassemble(const Instruction& in);
Instruction parse_disassembly(std::string_view line);

// -- builders used by program generators and tests --
Instruction ld_scalar(Reg dst, Reg base, int64_t offset);
Instruction ld_vec(Reg dst, Reg base, int64_t offset, uint8_t width = fn::kFull16);
Instruction st_vec(Reg data, Reg base, int64_t offset);
Instruction sub_vec8(Reg dst, Reg a, Reg b);
Instruction sdot(Reg acc, Reg weights, Reg src1, uint8_t k, bool subtract = false);
Instruction mla(Reg dst, Reg acc, Reg weights, Reg scalar);
Instruction mla8(std::array<Reg, 4> acc, Reg weights, Reg src1, uint8_t k);
Instruction mla8_imm(std::array<Reg, 4> acc, Reg weights, int8_t scalar);
Instruction copy_indexed(Reg dst, Reg src, uint8_t k, uint8_t size);
Instruction crs(Reg param_base);
Instruction branch(uint8_t cond, Reg src, int64_t target);
Instruction mov_imm(Reg dst, int64_t value);
Instruction add_imm(Reg dst, Reg src, int64_t value);
Instruction add(Reg dst, Reg a, Reg b);
Instruction vzero(std::initializer_list<Reg> dsts);
Instruction vsub_i16(Reg dst, Reg a, Reg b);
Instruction vadd_widen(Reg lo, Reg hi, Reg src);
Instruction nop();

/// Static program; the pc of an instruction is its index.
struct Program
{
  std::vector<Instruction> code;

  std::size_t size() const { return code.size(); }
  std::size_t emit(Instruction in)
  {
    code.push_back(in);
    return code.size() - 1;
  }
};

// -- values --

/// 128-bit vector register contents plus the SubVec8 overflow sideband.
struct VecValue
{
  std::array<uint8_t, kVecBytes> bytes{};
  uint16_t flags = 0;

  int8_t i8(std::size_t lane) const { return static_cast<int8_t>(bytes[lane]); }
  int16_t i16(std::size_t lane) const;
  int32_t i32(std::size_t lane) const;
  void set_i16(std::size_t lane, int16_t v);
  void set_i32(std::size_t lane, int32_t v);

  bool operator==(const VecValue&) const = default;
};

/// Source operand values, gathered by whoever executes the instruction.
struct Operands
{
  std::array<uint64_t, 3> ints{};
  std::array<VecValue, 3> vecs{};
  std::array<VecValue, 4> dst_old{}; // previous destination values for accumulating ops
};

struct Effects
{
  std::array<uint64_t, 4> ints{};
  std::array<VecValue, 4> vecs{};
  bool branch_taken = false;
  uint64_t address = 0; // memory ops
};

/// Effective address of a load or store.
uint64_t effective_address(const Instruction& in, const Operands& ops);

/// Register results of every non-memory instruction, and the address of memory
/// ones. Load data and store effects are applied by the caller.
Effects execute_alu(const Instruction& in, const Operands& ops);

/// Decode raw bytes read by LdVec into a register value.
VecValue load_value(const Instruction& in, const uint8_t* bytes);

} // namespace rsim::isa
