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
#include <optional>
#include <vector>

#include "rsim/config.hpp"

namespace rsim {

/// Set-associative LRU tag store. Each line remembers the cycle its data
/// arrives, so accesses to a line still being filled wait for that fill
/// instead of issuing a second request.
class Cache
{
public:
  explicit Cache(const CacheConfig& cfg);

  /// Ready cycle of the line if present; refreshes LRU.
  std::optional<uint64_t> touch(uint64_t line);
  bool contains(uint64_t line) const;
  /// Installs a line (evicting the LRU way) that becomes usable at `ready`.
  void fill(uint64_t line, uint64_t ready);

private:
  struct Way
  {
    uint64_t tag = 0;
    uint64_t ready = 0;
    uint64_t stamp = 0;
    bool valid = false;
  };

  std::size_t set_of(uint64_t line) const { return line % sets_; }

  std::size_t sets_;
  std::size_t ways_;
  std::vector<Way> lines_;
  uint64_t clock_ = 0;
};

/// Per-key stride detector issuing L2 prefetches: next line always, plus
/// `degree` strided lines `distance` strides ahead once a stride repeats.
/// Steps that are small multiples of the stride (a stream with accesses
/// skipped) keep it trained and widen the prefetch window accordingly.
class StridePrefetcher
{
public:
  StridePrefetcher(std::size_t entries, std::size_t degree, std::size_t distance);

  /// Lines to prefetch after a demand L2 access to `line` from `key`.
  std::vector<uint64_t> train(uint64_t key, uint64_t line);

private:
  struct Entry
  {
    uint64_t key = 0;
    uint64_t last = 0;
    int64_t stride = 0;
    uint32_t confidence = 0;
    uint64_t stamp = 0;
    bool valid = false;
  };

  std::vector<Entry> table_;
  std::size_t degree_;
  std::size_t distance_;
  uint64_t clock_ = 0;
};

struct MemoryCounters
{
  uint64_t l1i_accesses = 0;
  uint64_t l1i_misses = 0;
  uint64_t l1d_accesses = 0;
  uint64_t l1d_misses = 0;
  uint64_t l2_accesses = 0;     // data demand only
  uint64_t l2_misses = 0;
  uint64_t dram_accesses = 0;   // data demand only
  uint64_t l2_inst_accesses = 0;
  uint64_t dram_inst_accesses = 0;
  uint64_t l2_prefetches = 0;
  uint64_t dram_prefetch_accesses = 0;
};

/// L1I + L1D over a shared L2 with a stride prefetcher, backed by fixed-latency DRAM.
class MemoryHierarchy
{
public:
  explicit MemoryHierarchy(const MachineConfig& cfg);

  /// Cycle at which the data of [addr, addr+bytes) is available.
  uint64_t data_access(uint64_t addr, std::size_t bytes, uint64_t now, uint64_t key);
  uint64_t inst_access(uint64_t addr, uint64_t now);

  const MemoryCounters& counters() const { return counters_; }

private:
  uint64_t access_line(Cache& l1, uint64_t line, uint64_t now, uint64_t key, bool data);
  uint64_t l2_access(uint64_t line, uint64_t now, uint64_t key, bool data);
  void prefetch(uint64_t key, uint64_t line, uint64_t now);

  Cache l1i_;
  Cache l1d_;
  Cache l2_;
  std::optional<StridePrefetcher> prefetcher_;
  uint32_t l1_lat_;
  uint32_t l2_lat_;
  uint32_t dram_lat_;
  MemoryCounters counters_;
};

} // namespace rsim
