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

#include <benchmark/benchmark.h>
#include <omp.h>

#include "rsim/experiment.hpp"
#include "rsim/similarity.hpp"
#include "rsim/workloads.hpp"

using namespace rsim;

namespace {

const Workload& frames(std::size_t n)
{
  static const Workload w = generate({n, 1, 0.55, 0.5, 7, ValueRange::Relu});
  return w;
}

void BM_MeasureSerial(benchmark::State& st)
{
  const Workload& w = frames(1 << 22);
  for (auto _ : st)
    benchmark::DoNotOptimize(measure_serial(w.inputs, w.prev_inputs));
  st.SetBytesProcessed(int64_t(st.iterations()) * 2 * int64_t(w.inputs.size()));
}

void BM_MeasureParallel(benchmark::State& st)
{
  const Workload& w = frames(1 << 22);
  omp_set_num_threads(int(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(measure(w.inputs, w.prev_inputs));
  st.SetBytesProcessed(int64_t(st.iterations()) * 2 * int64_t(w.inputs.size()));
}

// sweep with one thread is the serial path
void BM_Sweep(benchmark::State& st)
{
  SweepSpec s;
  s.similarities = {0.0, 0.25, 0.5, 0.75, 1.0};
  s.shapes = {{128, 128}};
  s.variants = {KernelVariant::SensorBasic, KernelVariant::SensorReuse};
  omp_set_num_threads(int(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(sweep(s));
}

} // namespace

BENCHMARK(BM_MeasureSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeasureParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
