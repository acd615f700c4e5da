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

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace diffstride::nn {

struct NamedArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

/// Writes `<stem>.bin` (the arrays' float64 payloads back to back, little
/// endian) and `<stem>.json` (names, shapes, dtypes, byte offsets).
void save_checkpoint(const std::filesystem::path& stem, const std::vector<NamedArray>& arrays);

/// Reads a checkpoint written by `save_checkpoint`; payloads round-trip bit
/// for bit.
std::vector<NamedArray> load_checkpoint(const std::filesystem::path& stem);

}  // namespace diffstride::nn
