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

#include "rsim/cache.hpp"

#include <algorithm>
#include <numeric>

#include "rsim/common.hpp"

namespace rsim {

Cache::Cache(const CacheConfig& cfg) : sets_(cfg.sets()), ways_(cfg.ways), lines_(sets_ * ways_)
{
  if (sets_ == 0 || ways_ == 0)
    throw Error("Cache: empty geometry");
}

std::optional<uint64_t> Cache::touch(uint64_t line)
{
  const std::size_t base = set_of(line) * ways_;
  for (std::size_t w = 0; w < ways_; ++w) {
    Way& way = lines_[base + w];
    if (way.valid && way.tag == line) {
      way.stamp = ++clock_;
      return way.ready;
    }
  }
  return std::nullopt;
}

bool Cache::contains(uint64_t line) const
{
  const std::size_t base = set_of(line) * ways_;
  for (std::size_t w = 0; w < ways_; ++w)
    if (lines_[base + w].valid && lines_[base + w].tag == line)
      return true;
  return false;
}

void Cache::fill(uint64_t line, uint64_t ready)
{
  const std::size_t base = set_of(line) * ways_;
  Way* victim = &lines_[base];
  for (std::size_t w = 0; w < ways_; ++w) {
    Way& way = lines_[base + w];
    if (way.valid && way.tag == line) {
      victim = &way;
      break;
    }
    if (!way.valid || (victim->valid && way.stamp < victim->stamp))
      victim = &way;
  }
  *victim = Way{line, ready, ++clock_, true};
}

StridePrefetcher::StridePrefetcher(std::size_t entries, std::size_t degree, std::size_t distance)
    : table_(entries), degree_(degree), distance_(distance)
{
}

namespace {
// Largest multiple of the learned stride still taken as the same stream with
// accesses skipped, and the most lines refilled behind the front after one.
constexpr int64_t kMaxSkip = 64;
constexpr int64_t kMaxRefill = 16;
} // namespace

std::vector<uint64_t> StridePrefetcher::train(uint64_t key, uint64_t line)
{
  std::vector<uint64_t> out{line + 1};
  Entry* e = nullptr;
  Entry* victim = &table_[0];
  for (auto& t : table_) {
    if (t.valid && t.key == key) {
      e = &t;
      break;
    }
    if (!t.valid || (victim->valid && t.stamp < victim->stamp))
      victim = &t;
  }
  if (!e) {
    *victim = Entry{key, line, 0, 0, ++clock_, true};
    return out;
  }
  e->stamp = ++clock_;
  const int64_t step = static_cast<int64_t>(line) - static_cast<int64_t>(e->last);
  if (step == 0)
    return out;
  e->last = line;
  int64_t skip = 1;
  if (e->stride != 0 && step % e->stride == 0 && step / e->stride > 0 && step / e->stride <= kMaxSkip) {
    skip = step / e->stride;
    e->confidence = std::min<uint32_t>(e->confidence + 1, 3);
  } else if (e->confidence >= 2) {
    // one outlier (a long skip, a reordered access) does not retrain
    --e->confidence;
    return out;
  } else if (e->stride != 0 && (step > 0) == (e->stride > 0) &&
             std::abs(e->stride) / std::gcd(step, e->stride) <= kMaxSkip &&
             std::abs(step) / std::gcd(step, e->stride) <= kMaxSkip) {
    // both steps are multiples of a common stride: a sparse walk over it
    const int64_t g = std::gcd(step, e->stride);
    e->stride = step > 0 ? g : -g;
    skip = step / e->stride;
    e->confidence = 1;
  } else {
    e->stride = step;
    e->confidence = 0;
  }
  if (e->confidence >= 1) {
    // move the prefetch front as far as the stream just advanced, so a
    // skip does not leave holes behind it
    for (int64_t d = 1 - std::min(skip, kMaxRefill); d < static_cast<int64_t>(degree_); ++d) {
      const int64_t target = static_cast<int64_t>(line) + e->stride * (static_cast<int64_t>(distance_) + d);
      if (target >= 0)
        out.push_back(static_cast<uint64_t>(target));
    }
  }
  return out;
}

MemoryHierarchy::MemoryHierarchy(const MachineConfig& cfg)
    : l1i_(cfg.l1i), l1d_(cfg.l1d), l2_(cfg.l2), l1_lat_(cfg.l1_latency), l2_lat_(cfg.l2_latency),
      dram_lat_(cfg.dram_latency)
{
  if (cfg.prefetcher)
    prefetcher_.emplace(cfg.prefetch_table, cfg.prefetch_degree, cfg.prefetch_distance);
}

uint64_t MemoryHierarchy::l2_access(uint64_t line, uint64_t now, uint64_t key, bool data)
{
  (data ? counters_.l2_accesses : counters_.l2_inst_accesses)++;
  uint64_t ready;
  if (auto r = l2_.touch(line)) {
    ready = std::max<uint64_t>(now + l2_lat_, *r);
  } else {
    ++counters_.l2_misses;
    (data ? counters_.dram_accesses : counters_.dram_inst_accesses)++;
    ready = now + l2_lat_ + dram_lat_;
    l2_.fill(line, ready);
  }
  if (prefetcher_ && data)
    prefetch(key, line, now);
  return ready;
}

void MemoryHierarchy::prefetch(uint64_t key, uint64_t line, uint64_t now)
{
  for (uint64_t target : prefetcher_->train(key, line)) {
    if (l2_.contains(target))
      continue;
    ++counters_.l2_prefetches;
    ++counters_.dram_prefetch_accesses;
    l2_.fill(target, now + l2_lat_ + dram_lat_);
  }
}

uint64_t MemoryHierarchy::access_line(Cache& l1, uint64_t line, uint64_t now, uint64_t key, bool data)
{
  (data ? counters_.l1d_accesses : counters_.l1i_accesses)++;
  if (auto r = l1.touch(line))
    return std::max<uint64_t>(now + l1_lat_, *r);
  (data ? counters_.l1d_misses : counters_.l1i_misses)++;
  const uint64_t ready = l2_access(line, now + l1_lat_, key, data);
  l1.fill(line, ready);
  return ready;
}

uint64_t MemoryHierarchy::data_access(uint64_t addr, std::size_t bytes, uint64_t now, uint64_t key)
{
  const uint64_t first = addr / kLineBytes;
  const uint64_t last = (addr + std::max<std::size_t>(bytes, 1) - 1) / kLineBytes;
  uint64_t ready = 0;
  for (uint64_t line = first; line <= last; ++line)
    ready = std::max(ready, access_line(l1d_, line, now, key, true));
  return ready;
}

uint64_t MemoryHierarchy::inst_access(uint64_t addr, uint64_t now)
{
  return access_line(l1i_, addr / kLineBytes, now, addr, false);
}

} // namespace rsim
