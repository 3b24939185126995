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

#include "rsim/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <json.hpp>

#include "rsim/programs.hpp"

namespace rsim {

namespace fs = std::filesystem;

namespace {

// Bounded draws and shuffles are written out so that streams are identical
// across standard libraries; only the engine comes from <random>.
using Rng = std::mt19937_64;

uint64_t below(Rng& rng, uint64_t n) { return rng() % n; }

int8_t draw_any(Rng& rng, ValueRange r)
{
  return r == ValueRange::Relu ? static_cast<int8_t>(below(rng, 128)) : static_cast<int8_t>(below(rng, 256) - 128);
}

int8_t draw_nonzero(Rng& rng, ValueRange r)
{
  if (r == ValueRange::Relu)
    return static_cast<int8_t>(1 + below(rng, 127));
  const auto v = static_cast<int>(below(rng, 255)) - 128; // [-128, 126], skip 0
  return static_cast<int8_t>(v >= 0 ? v + 1 : v);
}

int8_t draw_other(Rng& rng, ValueRange r, int8_t not_this)
{
  const int lo = r == ValueRange::Relu ? 0 : -128;
  const int span = r == ValueRange::Relu ? 127 : 255; // range size minus one
  int v = lo + static_cast<int>(below(rng, static_cast<uint64_t>(span)));
  if (v >= not_this)
    ++v;
  return static_cast<int8_t>(v);
}

template <class T>
void shuffle(std::vector<T>& v, Rng& rng)
{
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[below(rng, i)]);
}

QuantTensor first_frame(const SyntheticSpec& s, Rng& rng)
{
  const std::size_t n = s.input_len;
  const std::size_t zeros = zero_identical_count(s.similarity, s.zero_fraction, n);
  const std::size_t nonzeros = identical_count(s.similarity, n) - zeros;
  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < n; ++i)
    pos[i] = i;
  shuffle(pos, rng);
  std::vector<int8_t> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < zeros)
      v[pos[i]] = 0;
    else if (i < zeros + nonzeros)
      v[pos[i]] = draw_nonzero(rng, s.range);
    else
      v[pos[i]] = draw_any(rng, s.range);
  }
  return QuantTensor::vector(std::move(v));
}

// Identical-zero positions are taken from prev's zeros, identical-nonzero ones
// from its nonzeros, and every remaining position gets a different value.
// Each produced frame again has enough of both for the next step.
QuantTensor next_frame(const SyntheticSpec& s, const QuantTensor& prev, Rng& rng)
{
  const std::size_t n = s.input_len;
  const std::size_t zeros = zero_identical_count(s.similarity, s.zero_fraction, n);
  const std::size_t nonzeros = identical_count(s.similarity, n) - zeros;
  std::vector<std::size_t> zpos, nzpos;
  for (std::size_t i = 0; i < n; ++i)
    (prev[i] == 0 ? zpos : nzpos).push_back(i);
  if (zpos.size() < zeros || nzpos.size() < nonzeros)
    throw Error("generate: previous frame cannot host the requested identical positions");
  shuffle(zpos, rng);
  shuffle(nzpos, rng);
  std::vector<uint8_t> keep(n, 0);
  for (std::size_t i = 0; i < zeros; ++i)
    keep[zpos[i]] = 1;
  for (std::size_t i = 0; i < nonzeros; ++i)
    keep[nzpos[i]] = 1;
  std::vector<int8_t> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = keep[i] ? prev[i] : draw_other(rng, s.range, prev[i]);
  return QuantTensor::vector(std::move(v));
}

} // namespace

void SyntheticSpec::validate() const
{
  if (input_len == 0 || output_len == 0)
    throw Error("SyntheticSpec: lengths must be >= 1");
  if (!(similarity >= 0.0 && similarity <= 1.0))
    throw Error("SyntheticSpec: similarity must be in [0, 1]");
  if (!(zero_fraction >= 0.0 && zero_fraction <= 1.0))
    throw Error("SyntheticSpec: zero_fraction must be in [0, 1]");
}

std::size_t identical_count(double similarity, std::size_t n)
{
  return static_cast<std::size_t>(std::llround(similarity * static_cast<double>(n)));
}

std::size_t zero_identical_count(double similarity, double zero_fraction, std::size_t n)
{
  return static_cast<std::size_t>(
      std::llround(zero_fraction * static_cast<double>(identical_count(similarity, n))));
}

Workload generate(const SyntheticSpec& spec)
{
  spec.validate();
  Rng rng(spec.seed);
  Workload w;
  w.prev_inputs = first_frame(spec, rng);
  w.inputs = next_frame(spec, w.prev_inputs, rng);
  std::vector<int8_t> weights(spec.input_len * spec.output_len);
  for (auto& x : weights)
    x = static_cast<int8_t>(below(rng, 256) - 128);
  w.weights = QuantTensor(spec.input_len, spec.output_len, std::move(weights));
  return w;
}

std::vector<QuantTensor> generate_frames(const SyntheticSpec& spec, std::size_t frames)
{
  spec.validate();
  Rng rng(spec.seed);
  std::vector<QuantTensor> out;
  if (frames == 0)
    return out;
  out.push_back(first_frame(spec, rng));
  while (out.size() < frames)
    out.push_back(next_frame(spec, out.back(), rng));
  return out;
}

// -- dumps --

namespace {

void write_bytes(const fs::path& p, std::span<const int8_t> data)
{
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!f)
    throw Error("cannot write " + p.string());
}

std::vector<int8_t> read_bytes(const fs::path& p, std::size_t expected)
{
  std::error_code ec;
  const auto size = fs::file_size(p, ec);
  if (ec)
    throw Error("dump: cannot read " + p.string());
  if (size != expected)
    throw Error("dump: " + p.filename().string() + " holds " + std::to_string(size) + " bytes, manifest implies " +
                std::to_string(expected));
  std::vector<int8_t> out(expected);
  std::ifstream f(p, std::ios::binary);
  f.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(expected));
  if (!f)
    throw Error("dump: short read on " + p.string());
  return out;
}

} // namespace

void write_dump(const LayerDump& d, const fs::path& dir)
{
  if (d.weights.rows() != d.input_len || d.weights.cols() != d.output_len)
    throw Error("write_dump: weight shape does not match the layer");
  fs::create_directories(dir);
  nlohmann::json m{{"name", d.name},
                   {"input_len", d.input_len},
                   {"output_len", d.output_len},
                   {"dtype", "i8"},
                   {"frame_count", d.frames.size()},
                   {"dataflow", d.dataflow == Dataflow::InputStationary ? "is" : "os"}};
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
  write_bytes(dir / "weights.bin", d.weights.data());
  for (std::size_t k = 0; k < d.frames.size(); ++k) {
    if (d.frames[k].size() != d.input_len)
      throw Error("write_dump: frame " + std::to_string(k) + " has the wrong length");
    write_bytes(dir / ("inputs_" + std::to_string(k) + ".bin"), d.frames[k].data());
  }
}

LayerDump read_dump(const fs::path& dir)
{
  std::ifstream f(dir / "manifest.json");
  if (!f)
    throw Error("dump: no manifest.json in " + dir.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error("dump: malformed manifest in " + dir.string() + ": " + e.what());
  }
  LayerDump d;
  try {
    d.name = m.at("name").get<std::string>();
    d.input_len = m.at("input_len").get<std::size_t>();
    d.output_len = m.at("output_len").get<std::size_t>();
    if (m.at("dtype").get<std::string>() != "i8")
      throw Error("dump: only dtype \"i8\" is supported");
    const auto frames = m.at("frame_count").get<std::size_t>();
    const std::string df = m.value("dataflow", "os");
    if (df != "os" && df != "is")
      throw Error("dump: dataflow must be \"os\" or \"is\"");
    d.dataflow = df == "is" ? Dataflow::InputStationary : Dataflow::OutputStationary;
    if (d.input_len == 0 || d.output_len == 0)
      throw Error("dump: lengths must be >= 1");
    d.weights = QuantTensor(d.input_len, d.output_len, read_bytes(dir / "weights.bin", d.input_len * d.output_len));
    for (std::size_t k = 0; k < frames; ++k)
      d.frames.push_back(QuantTensor::vector(read_bytes(dir / ("inputs_" + std::to_string(k) + ".bin"), d.input_len)));
  } catch (const nlohmann::json::exception& e) {
    throw Error("dump: bad manifest field in " + dir.string() + ": " + e.what());
  }
  return d;
}

std::vector<LayerDump> read_dumps(const fs::path& path)
{
  if (fs::exists(path / "manifest.json"))
    return {read_dump(path)};
  if (!fs::is_directory(path))
    throw Error("dump: " + path.string() + " is not a directory");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(path))
    if (e.is_directory() && fs::exists(e.path() / "manifest.json"))
      dirs.push_back(e.path());
  if (dirs.empty())
    throw Error("dump: no layer dumps under " + path.string());
  std::sort(dirs.begin(), dirs.end());
  std::vector<LayerDump> out;
  for (const auto& d : dirs)
    out.push_back(read_dump(d));
  return out;
}

// -- staging --

namespace {

constexpr uint64_t kPage = 4096;
constexpr uint64_t align_page(uint64_t a) { return (a + kPage - 1) / kPage * kPage; }

void write_i8(MemoryImage& mem, uint64_t addr, std::span<const int8_t> v, std::size_t padded)
{
  std::vector<uint8_t> buf(padded, 0);
  std::memcpy(buf.data(), v.data(), v.size());
  mem.write(addr, buf);
}

} // namespace

MemoryLayout plan_layout(std::size_t input_len, std::size_t output_len, KernelMode mode, Dataflow dataflow)
{
  MemoryLayout m;
  LayerSpec& l = m.layer;
  l.input_len = input_len;
  l.output_len = output_len;
  l.kernel_mode = mode;
  l.dataflow = dataflow;
  m.param_addr = kPage; // page 0 stays unused
  uint64_t at = align_page(m.param_addr + kParamBlockBytes);
  l.input_addr = at;
  at = align_page(at + l.input_bytes());
  l.prev_input_addr = at;
  at = align_page(at + l.input_bytes());
  l.output_addr = at;
  at = align_page(at + l.output_bytes());
  l.weight_addr = at;
  at = align_page(at + l.weight_bytes());
  m.image_bytes = at;
  return m;
}

void stage(MemoryImage& mem, const MemoryLayout& layout, Layout weight_layout, const StageTensors& t)
{
  const LayerSpec& l = layout.layer;
  l.validate();
  const uint64_t regions[][2] = {{l.input_addr, l.input_bytes()},
                                 {l.prev_input_addr, l.input_bytes()},
                                 {l.output_addr, l.output_bytes()},
                                 {l.weight_addr, l.weight_bytes()}};
  for (const auto& r : regions) {
    if (!mem.contains(r[0], r[1]))
      throw Error("stage: region at " + std::to_string(r[0]) + " lies outside the memory image");
    if (layout.param_addr < r[0] + r[1] && r[0] < layout.param_addr + kParamBlockBytes)
      throw Error("stage: parameter block overlaps a tensor region");
  }
  if (!t.inputs || !t.weights)
    throw Error("stage: inputs and weights are required");
  if (t.inputs->size() != l.input_len || t.weights->rows() != l.input_len || t.weights->cols() != l.output_len)
    throw Error("stage: tensors do not match the layer dimensions");
  if (l.kernel_mode == KernelMode::Reuse && (!t.prev_inputs || !t.prev_output))
    throw Error("stage: Reuse mode needs previous inputs and outputs");

  mem.write(layout.param_addr, encode_param_block(l));
  write_i8(mem, l.input_addr, t.inputs->data(), l.input_bytes());
  if (t.prev_inputs) {
    if (t.prev_inputs->size() != l.input_len)
      throw Error("stage: previous inputs have the wrong length");
    write_i8(mem, l.prev_input_addr, t.prev_inputs->data(), l.input_bytes());
  }
  std::vector<int32_t> out(pad16(l.output_len), 0);
  if (t.prev_output) {
    if (t.prev_output->length() != l.output_len)
      throw Error("stage: previous output has the wrong length");
    std::copy(t.prev_output->data.begin(), t.prev_output->data.end(), out.begin());
  }
  for (std::size_t o = 0; o < out.size(); ++o)
    mem.write_i32(l.output_addr + 4 * o, out[o]);

  QuantTensor w;
  switch (weight_layout) {
  case Layout::RowMajor: w = *t.weights; break;
  case Layout::WeightInterleaved16: w = interleave_weights(*t.weights); break;
  case Layout::SdotPacked: w = pack_sdot_weights(*t.weights); break;
  }
  write_i8(mem, l.weight_addr, w.data(), l.weight_bytes());
}

QuantTensor read_inputs(const MemoryImage& mem, uint64_t addr, std::size_t len)
{
  std::vector<int8_t> v(len);
  mem.read(addr, std::span(reinterpret_cast<uint8_t*>(v.data()), len));
  return QuantTensor::vector(std::move(v));
}

AccumTensor read_outputs(const MemoryImage& mem, const LayerSpec& layer)
{
  AccumTensor out(layer.output_len);
  for (std::size_t o = 0; o < layer.output_len; ++o)
    out.data[o] = mem.read_i32(layer.output_addr + 4 * o);
  return out;
}

// -- evaluation session --

EvaluationSession::EvaluationSession(KernelVariant variant, Dataflow dataflow, const QuantTensor& weights,
                                     const QuantTensor& first)
    : variant_(variant),
      layout_(plan_layout(weights.rows(), weights.cols(), is_reuse(variant) ? KernelMode::Reuse : KernelMode::Basic,
                          dataflow)),
      mem_(layout_.image_bytes), inputs_(first)
{
  const AccumTensor out = matvec(first, weights);
  StageTensors t{&first, &first, &weights, &out};
  stage(mem_, layout_, weight_layout(variant), t);
  program_ = build_program(variant, layout_.layer, layout_.param_addr);
  evaluated_ = true;
}

void EvaluationSession::advance_evaluation(const QuantTensor& frame)
{
  if (in_flight())
    throw Error("advance_evaluation: an evaluation is still in flight");
  if (!evaluated_)
    throw Error("advance_evaluation: the current frame has not been evaluated yet");
  if (frame.size() != layout_.layer.input_len)
    throw Error("advance_evaluation: frame length " + std::to_string(frame.size()) + " does not match the layer (" +
                std::to_string(layout_.layer.input_len) + ")");
  const LayerSpec& l = layout_.layer;
  write_i8(mem_, l.prev_input_addr, inputs_.data(), l.input_bytes());
  write_i8(mem_, l.input_addr, frame.data(), l.input_bytes());
  // the output region already holds the previous output
  inputs_ = frame;
  evaluated_ = false;
}

Core& EvaluationSession::begin(const MachineConfig& cfg, RunOptions options)
{
  if (in_flight())
    throw Error("EvaluationSession: evaluation already in flight");
  core_.emplace(cfg, program_, mem_, options);
  return *core_;
}

SimStats EvaluationSession::finish()
{
  if (!in_flight())
    throw Error("EvaluationSession: nothing in flight");
  SimStats s = core_->run();
  mem_ = core_->memory();
  core_.reset();
  evaluated_ = true;
  return s;
}

SimStats EvaluationSession::evaluate(const MachineConfig& cfg, RunOptions options)
{
  begin(cfg, options);
  try {
    return finish();
  } catch (...) {
    core_.reset();
    throw;
  }
}

} // namespace rsim
