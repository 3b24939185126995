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

#include "rsim/isa.hpp"
#include "rsim/kernels.hpp"
#include "rsim/tensors.hpp"

namespace rsim {

/// Weight layout a variant's program expects at weight_addr.
Layout weight_layout(KernelVariant v);

/// Front-end program computing one layer with the given kernel variant.
///
/// Software kernels read the layer addresses baked in as immediates. The
/// reuse ones update the previous output in place at output_addr, so the
/// harness stages it there. Sensor variants are two instructions: load the
/// parameter block address and CRS; the block itself selects Basic/Reuse.
///
/// Loops run over whole 16-lane chunks; padding lanes hold zeros.
isa::Program build_program(KernelVariant v, const LayerSpec& layer, uint64_t param_addr);

} // namespace rsim
