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

#include "rsim/branch.hpp"

#include "rsim/common.hpp"

namespace rsim {

BranchPredictor::BranchPredictor(PredictorKind kind, std::size_t entries) : kind_(kind), counters_(entries, 1)
{
  if (entries == 0)
    throw Error("BranchPredictor: empty table");
}

bool BranchPredictor::predict(uint64_t pc, bool actual) const
{
  switch (kind_) {
  case PredictorKind::Oracle: return actual;
  case PredictorKind::AlwaysWrong: return !actual;
  case PredictorKind::AlwaysNotTaken: return false;
  case PredictorKind::Bimodal: return counters_[pc % counters_.size()] >= 2;
  }
  return false;
}

void BranchPredictor::update(uint64_t pc, bool taken)
{
  if (kind_ != PredictorKind::Bimodal)
    return;
  uint8_t& c = counters_[pc % counters_.size()];
  if (taken && c < 3)
    ++c;
  else if (!taken && c > 0)
    --c;
}

} // namespace rsim
