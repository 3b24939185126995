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

#include "rsim/similarity.hpp"

#include <cstdint>

namespace rsim {

namespace {

void check_shapes(const QuantTensor& curr, const QuantTensor& prev)
{
  if (!curr.same_shape(prev))
    throw Error("similarity: shape mismatch");
  if (curr.size() == 0)
    throw Error("similarity: empty tensors");
}

SimilarityReport finish(std::size_t n, int64_t zero, int64_t nonzero, int64_t groups_zero)
{
  SimilarityReport r;
  r.elements = n;
  const double dn = static_cast<double>(n);
  r.zero_identical = static_cast<double>(zero) / dn;
  r.nonzero_identical = static_cast<double>(nonzero) / dn;
  r.total = r.zero_identical + r.nonzero_identical;
  const std::size_t groups = n / kSubVector;
  r.per_subvector4_all_zero = groups ? static_cast<double>(groups_zero) / static_cast<double>(groups) : 0.0;
  return r;
}

} // namespace

SimilarityReport measure_serial(const QuantTensor& curr, const QuantTensor& prev)
{
  check_shapes(curr, prev);
  const auto c = curr.data();
  const auto p = prev.data();
  int64_t zero = 0, nonzero = 0, groups_zero = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == p[i]) {
      if (c[i] == 0)
        ++zero;
      else
        ++nonzero;
    }
  }
  for (std::size_t g = 0; g + kSubVector <= c.size(); g += kSubVector) {
    bool all = true;
    for (std::size_t m = 0; m < kSubVector; ++m)
      all = all && c[g + m] == p[g + m];
    groups_zero += all;
  }
  return finish(c.size(), zero, nonzero, groups_zero);
}

SimilarityReport measure(const QuantTensor& curr, const QuantTensor& prev)
{
  check_shapes(curr, prev);
  const int8_t* c = curr.data().data();
  const int8_t* p = prev.data().data();
  const int64_t n = static_cast<int64_t>(curr.size());
  const int64_t groups = n / static_cast<int64_t>(kSubVector);
  int64_t zero = 0, nonzero = 0, groups_zero = 0;

#pragma omp parallel for reduction(+ : zero, nonzero) schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    const bool same = c[i] == p[i];
    zero += same && c[i] == 0;
    nonzero += same && c[i] != 0;
  }

#pragma omp parallel for reduction(+ : groups_zero) schedule(static)
  for (int64_t g = 0; g < groups; ++g) {
    const int64_t base = g * static_cast<int64_t>(kSubVector);
    bool all = true;
    for (int64_t m = 0; m < static_cast<int64_t>(kSubVector); ++m)
      all = all && c[base + m] == p[base + m];
    groups_zero += all;
  }
  return finish(static_cast<std::size_t>(n), zero, nonzero, groups_zero);
}

std::vector<SimilarityReport> measure_stream(std::span<const QuantTensor> frames)
{
  if (frames.size() < 2)
    throw Error("measure_stream: need at least two frames");
  std::vector<SimilarityReport> out;
  out.reserve(frames.size() - 1);
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    if (!frames[k + 1].same_shape(frames[0]))
      throw Error("measure_stream: non-uniform frame shapes");
    out.push_back(measure(frames[k + 1], frames[k]));
  }
  return out;
}

SimilaritySummary summarize(std::span<const SimilarityReport> reports)
{
  SimilaritySummary s;
  s.reports = reports.size();
  if (reports.empty())
    return s;
  double wsum = 0.0;
  for (const auto& r : reports) {
    const double w = static_cast<double>(r.elements);
    s.unweighted.total += r.total;
    s.unweighted.zero_identical += r.zero_identical;
    s.unweighted.nonzero_identical += r.nonzero_identical;
    s.unweighted.per_subvector4_all_zero += r.per_subvector4_all_zero;
    s.weighted.total += w * r.total;
    s.weighted.zero_identical += w * r.zero_identical;
    s.weighted.nonzero_identical += w * r.nonzero_identical;
    s.weighted.per_subvector4_all_zero += w * r.per_subvector4_all_zero;
    s.unweighted.elements += r.elements;
    wsum += w;
  }
  const double n = static_cast<double>(reports.size());
  s.unweighted.total /= n;
  s.unweighted.zero_identical /= n;
  s.unweighted.nonzero_identical /= n;
  s.unweighted.per_subvector4_all_zero /= n;
  if (wsum > 0) {
    s.weighted.total /= wsum;
    s.weighted.zero_identical /= wsum;
    s.weighted.nonzero_identical /= wsum;
    s.weighted.per_subvector4_all_zero /= wsum;
  }
  s.weighted.elements = s.unweighted.elements;
  return s;
}

} // namespace rsim
