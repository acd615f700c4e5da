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

#include "diffstride/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace diffstride::nn {

namespace {

constexpr const char* kFormat = "diffstride-checkpoint";
constexpr int kVersion = 1;

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

void put_le(std::ofstream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& stem, const std::vector<NamedArray>& arrays) {
  const auto bin_path = with_suffix(stem, ".bin");
  std::ofstream bin(bin_path, std::ios::binary | std::ios::trunc);
  if (!bin) throw std::runtime_error("save_checkpoint: cannot open " + bin_path.string());

  nlohmann::json manifest;
  manifest["format"] = kFormat;
  manifest["version"] = kVersion;
  manifest["data_file"] = bin_path.filename().string();
  manifest["byte_order"] = "little";
  manifest["arrays"] = nlohmann::json::array();
  std::size_t offset = 0;
  for (const NamedArray& a : arrays) {
    std::size_t count = 1;
    for (std::size_t d : a.shape) count *= d;
    if (count != a.data.size()) {
      throw std::invalid_argument("save_checkpoint: array '" + a.name +
                                  "' has data inconsistent with its shape");
    }
    for (double v : a.data) put_le(bin, v);
    manifest["arrays"].push_back({{"name", a.name},
                                  {"dtype", "float64"},
                                  {"shape", a.shape},
                                  {"offset", offset},
                                  {"count", count}});
    offset += 8 * count;
  }
  if (!bin) throw std::runtime_error("save_checkpoint: write failed for " + bin_path.string());

  const auto json_path = with_suffix(stem, ".json");
  std::ofstream js(json_path, std::ios::trunc);
  if (!js) throw std::runtime_error("save_checkpoint: cannot open " + json_path.string());
  js << manifest.dump(2) << '\n';
}

std::vector<NamedArray> load_checkpoint(const std::filesystem::path& stem) {
  const auto json_path = with_suffix(stem, ".json");
  std::ifstream js(json_path);
  if (!js) throw std::runtime_error("load_checkpoint: cannot open " + json_path.string());
  const nlohmann::json manifest = nlohmann::json::parse(js);
  if (manifest.value("format", "") != kFormat || manifest.value("version", 0) != kVersion) {
    throw std::runtime_error("load_checkpoint: unsupported manifest in " + json_path.string());
  }

  const auto bin_path = json_path.parent_path() / manifest.at("data_file").get<std::string>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("load_checkpoint: cannot open " + bin_path.string());
  std::vector<unsigned char> payload((std::istreambuf_iterator<char>(bin)),
                                     std::istreambuf_iterator<char>());

  std::vector<NamedArray> arrays;
  for (const auto& entry : manifest.at("arrays")) {
    if (entry.at("dtype").get<std::string>() != "float64") {
      throw std::runtime_error("load_checkpoint: unsupported dtype");
    }
    NamedArray a;
    a.name = entry.at("name").get<std::string>();
    a.shape = entry.at("shape").get<std::vector<std::size_t>>();
    const auto offset = entry.at("offset").get<std::size_t>();
    const auto count = entry.at("count").get<std::size_t>();
    if (offset + 8 * count > payload.size()) {
      throw std::runtime_error("load_checkpoint: array '" + a.name + "' overruns data file");
    }
    a.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) a.data[i] = get_le(payload.data() + offset + 8 * i);
    arrays.push_back(std::move(a));
  }
  return arrays;
}

}  // namespace diffstride::nn
