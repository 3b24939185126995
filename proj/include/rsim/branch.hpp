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

#include <cstdint>
#include <vector>

#include "rsim/config.hpp"

namespace rsim {

/// Direction predictor for conditional branches. Unconditional branches are
/// assumed to hit in a perfect BTB and never consult it.
class BranchPredictor
{
public:
  BranchPredictor(PredictorKind kind, std::size_t entries);

  /// `actual` is the true outcome, known to the oracle and always-wrong kinds only.
  bool predict(uint64_t pc, bool actual) const;
  void update(uint64_t pc, bool taken);

  PredictorKind kind() const { return kind_; }

private:
  PredictorKind kind_;
  std::vector<uint8_t> counters_; // 2-bit saturating, >= 2 means taken
};

} // namespace rsim
