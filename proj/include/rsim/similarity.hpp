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

#include <span>
#include <vector>

#include "rsim/tensors.hpp"

namespace rsim {

/// Fractions of identical positions between two consecutive evaluations.
struct SimilarityReport
{
  double total = 0.0;
  double zero_identical = 0.0;
  double nonzero_identical = 0.0;
  double per_subvector4_all_zero = 0.0; // aligned groups of kSubVector with all-zero delta
  std::size_t elements = 0;
};

/// Size-aware mean of several reports; both the plain and the element-weighted
/// means are kept because either can be meant by "average across layers".
struct SimilaritySummary
{
  SimilarityReport unweighted;
  SimilarityReport weighted;
  std::size_t reports = 0;
};

SimilarityReport measure(const QuantTensor& curr, const QuantTensor& prev);
/// Single-threaded reference for measure(); kept for tests and benchmarks.
SimilarityReport measure_serial(const QuantTensor& curr, const QuantTensor& prev);

/// report[k] = measure(frames[k+1], frames[k]).
std::vector<SimilarityReport> measure_stream(std::span<const QuantTensor> frames);

SimilaritySummary summarize(std::span<const SimilarityReport> reports);

} // namespace rsim
