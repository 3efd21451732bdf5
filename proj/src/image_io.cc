// Copyright (c) the SFC Project Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sfc/image_io.h"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include "sfc/common.h"

namespace sfc {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

Tensor ReadPpm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open image: " + path);
  std::string magic;
  f >> magic;
  if (magic != "P6" && magic != "P5") {
    throw DataError("unsupported PPM variant in " + path);
  }
  int w = 0, h = 0, maxval = 0;
  f >> w >> h >> maxval;
  f.get();  // single whitespace after header
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw DataError("unsupported PPM header in " + path);
  }
  const int ch = magic == "P6" ? 3 : 1;
  std::vector<uint8_t> raw(static_cast<size_t>(w) * h * ch);
  f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!f) throw DataError("truncated PPM: " + path);
  Tensor out({h, w, 3});
  for (size_t p = 0; p < static_cast<size_t>(w) * h; ++p) {
    for (int c = 0; c < 3; ++c) {
      const uint8_t v = raw[p * ch + (ch == 3 ? c : 0)];
      out[p * 3 + static_cast<size_t>(c)] = static_cast<float>(v) / 255.0f;
    }
  }
  return out;
}

Tensor ReadPngFile(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError("cannot open image: " + path);
  uint8_t sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw DataError("not a PNG file: " + path);
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  if (!png) throw DataError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng info init failed");
  }
  std::vector<png_bytep> rows;
  std::vector<uint8_t> pixels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("corrupt PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  pixels.resize(static_cast<size_t>(w) * h * 3);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) {
    rows[y] = pixels.data() + static_cast<size_t>(y) * w * 3;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Tensor out({static_cast<int>(h), static_cast<int>(w), 3});
  for (size_t i = 0; i < pixels.size(); ++i) {
    out[i] = static_cast<float>(pixels[i]) / 255.0f;
  }
  return out;
}

}  // namespace

Tensor ReadImage(const std::string& path) {
  if (path.size() >= 4) {
    const std::string ext = path.substr(path.size() - 4);
    if (ext == ".ppm" || ext == ".pgm") return ReadPpm(path);
  }
  return ReadPngFile(path);
}

void WritePng(const Tensor& image, const std::string& path) {
  Check(image.ndim() == 3, "WritePng expects (H,W,C)");
  const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
  Check(c == 1 || c == 3, "WritePng supports 1 or 3 channels");

  std::vector<uint8_t> pixels(static_cast<size_t>(h) * w * c);
  for (size_t i = 0; i < pixels.size(); ++i) {
    const float v = std::clamp(image[i], 0.0f, 1.0f);
    pixels[i] = static_cast<uint8_t>(v * 255.0f + 0.5f);
  }

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("cannot write image: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) throw DataError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng info init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("PNG write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h),
               8, c == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y) {
    png_write_row(png, pixels.data() + static_cast<size_t>(y) * w * c);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace sfc
