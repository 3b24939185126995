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

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rsim {

/// Contract violation: bad shapes, malformed inputs, misuse of an API.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A fault raised by the simulated machine itself (bad address at commit,
/// nested CRS, structural deadlock). The CLI maps these to exit code 2.
class SimulationFault : public Error
{
public:
  using Error::Error;
};

inline constexpr std::size_t kVecBytes = 16;     // 128-bit vector registers
inline constexpr std::size_t kLineBytes = 64;
inline constexpr std::size_t kSubVector = 4;     // sdot sub-vector width (int8 lanes)

constexpr std::size_t pad16(std::size_t n) { return (n + 15) / 16 * 16; }
constexpr std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Two's complement wrapping arithmetic without signed-overflow UB.
constexpr int32_t wrap_add32(int32_t a, int64_t b)
{
  return static_cast<int32_t>(static_cast<uint32_t>(a) + static_cast<uint32_t>(static_cast<uint64_t>(b)));
}
constexpr int16_t wrap_add16(int16_t a, int32_t b)
{
  return static_cast<int16_t>(static_cast<uint16_t>(a) + static_cast<uint16_t>(static_cast<uint32_t>(b)));
}

} // namespace rsim
