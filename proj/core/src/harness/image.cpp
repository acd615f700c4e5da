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

#include "diffstride/harness/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "diffstride/layer.hpp"

namespace diffstride::harness {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) throw std::runtime_error("pnm: truncated header");
    return bytes_.substr(start, pos_ - start);
  }

  long number(const char* what) {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      throw std::runtime_error(std::string("pnm: bad ") + what + " '" + t + "'");
    }
    if (t.size() > 9) throw std::runtime_error(std::string("pnm: ") + what + " too large");
    return std::stol(t);
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw std::runtime_error("pnm: missing whitespace before raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image parse_pnm(const std::string& bytes) {
  HeaderReader header(bytes);
  const std::string magic = header.token();
  std::size_t channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw std::runtime_error("pnm: unsupported magic '" + magic + "' (expected P5 or P6)");
  }
  const long width = header.number("width");
  const long height = header.number("height");
  const long max_val = header.number("max value");
  if (width <= 0 || height <= 0) throw std::runtime_error("pnm: empty image");
  if (max_val <= 0 || max_val > 255) {
    throw std::runtime_error("pnm: max value must be in 1..255");
  }
  const std::size_t offset = header.raster_offset();
  const std::size_t count =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
  if (bytes.size() < offset + count) throw std::runtime_error("pnm: truncated raster");

  Image img;
  img.max_val = static_cast<int>(max_val);
  img.pixels = RealTensor(Shape3{static_cast<std::size_t>(height), static_cast<std::size_t>(width),
                                 channels});
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = static_cast<unsigned char>(bytes[offset + i]);
    if (v > max_val) throw std::runtime_error("pnm: sample exceeds max value");
    img.pixels.data()[i] = v;
  }
  return img;
}

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pnm(ss.str());
}

std::string encode_pnm(const Image& image) {
  const RealTensor& p = image.pixels;
  if (p.channels() != 1 && p.channels() != 3) {
    throw std::invalid_argument("pnm: only 1 or 3 channels can be written");
  }
  if (image.max_val <= 0 || image.max_val > 255) {
    throw std::invalid_argument("pnm: max value must be in 1..255");
  }
  std::string out = (p.channels() == 1 ? "P5\n" : "P6\n") + std::to_string(p.width()) + " " +
                    std::to_string(p.height()) + "\n" + std::to_string(image.max_val) + "\n";
  out.reserve(out.size() + p.size());
  for (double v : p.data()) {
    const double r = std::isfinite(v) ? std::round(v) : 0.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(
        std::clamp(r, 0.0, static_cast<double>(image.max_val)))));
  }
  return out;
}

void write_pnm(const std::filesystem::path& path, const Image& image) {
  const std::string bytes = encode_pnm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ResizeMode parse_resize_mode(const std::string& name) {
  if (name == "spectral") return ResizeMode::kSpectral;
  if (name == "diffstride-mask" || name == "diffstride") return ResizeMode::kDiffStrideMask;
  throw std::invalid_argument("unknown resize mode '" + name + "'");
}

Image resize_image(const Image& in, std::pair<double, double> strides, double smoothness,
                   ResizeMode mode) {
  const RealTensor& x = in.pixels;
  RealTensor y;
  if (mode == ResizeMode::kSpectral) {
    y = layer::spectral_pool(x, strides);
  } else {
    const layer::StrideParams params(strides.first, strides.second, x.height(), x.width());
    if (!params.in_box()) {
      throw std::invalid_argument("resize: strides outside [1, size) for this image");
    }
    y = layer::diffstride_forward(x, params, smoothness).output;
  }
  // The unitary transform scales a constant by sqrt(HW / H'W').
  const double gain = std::sqrt(static_cast<double>(y.height() * y.width()) /
                                static_cast<double>(x.height() * x.width()));
  for (double& v : y.data()) v = std::clamp(v * gain, 0.0, static_cast<double>(in.max_val));
  return Image{std::move(y), in.max_val};
}

}  // namespace diffstride::harness
