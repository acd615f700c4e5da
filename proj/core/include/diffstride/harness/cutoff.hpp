// Copyright 2026 The DiffStride Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace diffstride::harness {

/// Upper cut-off frequency (Hz) of the low-pass implied by a stride on a
/// signal sampled at `frame_rate_hz`: (frame_rate / 2) / stride.
double stride_to_cutoff(double stride, double frame_rate_hz);

}  // namespace diffstride::harness
