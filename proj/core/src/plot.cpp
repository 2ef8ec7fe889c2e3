// core/src/plot.cpp

// Copyright 2026  The tspl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "tspl/plot.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tspl/error.hpp"

namespace tspl {

namespace {

constexpr std::size_t kMarginLeft = 60, kMarginRight = 20, kMarginTop = 20, kMarginBottom = 40;
constexpr std::size_t kTickLength = 6;
constexpr int kTicks = 5;

void paint(Raster& r, long x, long y, const std::uint8_t* color) {
  if (x < 0 || y < 0 || x >= static_cast<long>(r.width) || y >= static_cast<long>(r.height)) return;
  std::memcpy(r.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)), color, 3);
}

void write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

}  // namespace

Raster render_raster(std::span<const double> values, const PlotOptions& options) {
  if (values.empty()) throw ValidationError("render_plot: zero-length series");
  if (options.width < kMarginLeft + kMarginRight + 2 ||
      options.height < kMarginTop + kMarginBottom + 2)
    throw ValidationError("render_plot: canvas too small");
  if (options.line_width == 0) throw ValidationError("render_plot: line width must be positive");

  Raster r;
  r.width = options.width;
  r.height = options.height;
  r.rgb.assign(r.width * r.height * 3, 255);

  const long x0 = kMarginLeft, x1 = static_cast<long>(r.width - kMarginRight) - 1;
  const long y0 = kMarginTop, y1 = static_cast<long>(r.height - kMarginBottom) - 1;
  static constexpr std::uint8_t kBlack[3] = {0, 0, 0};

  for (long x = x0 - 1; x <= x1; ++x) paint(r, x, y1 + 1, kBlack);
  for (long y = y0; y <= y1 + 1; ++y) paint(r, x0 - 1, y, kBlack);
  for (int k = 0; k < kTicks; ++k) {
    const long tx = x0 + std::lround(static_cast<double>(k) * static_cast<double>(x1 - x0) / (kTicks - 1));
    const long ty = y0 + std::lround(static_cast<double>(k) * static_cast<double>(y1 - y0) / (kTicks - 1));
    for (long d = 1; d <= static_cast<long>(kTickLength); ++d) {
      paint(r, tx, y1 + 1 + d, kBlack);
      paint(r, x0 - 1 - d, ty, kBlack);
    }
  }

  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw ValidationError("render_plot: series contains non-finite values");
  const std::size_t n = values.size();
  std::vector<double> px(n), py(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = hi > lo ? (values[i] - lo) / (hi - lo) : 0.5;
    v = std::round(v * 1e9) / 1e9;
    px[i] = n == 1 ? 0.5 * static_cast<double>(x0 + x1)
                   : static_cast<double>(x0) + static_cast<double>(i) * static_cast<double>(x1 - x0) /
                                                   static_cast<double>(n - 1);
    py[i] = static_cast<double>(y0) + (1.0 - v) * static_cast<double>(y1 - y0);
  }
  const long w = static_cast<long>(options.line_width);
  const auto stamp = [&](double x, double y) {
    const long cx = std::lround(x), cy = std::lround(y);
    for (long dy = 0; dy < w; ++dy)
      for (long dx = 0; dx < w; ++dx) paint(r, cx + dx - (w - 1) / 2, cy + dy - (w - 1) / 2, kLineColor);
  };
  stamp(px[0], py[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const double dx = px[i] - px[i - 1], dy = py[i] - py[i - 1];
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(std::max(std::abs(dx), std::abs(dy)))));
    for (long s = 1; s <= steps; ++s) {
      const double f = static_cast<double>(s) / static_cast<double>(steps);
      stamp(px[i - 1] + f * dx, py[i - 1] + f * dy);
    }
  }
  return r;
}

std::vector<std::uint8_t> encode_png(const Raster& raster) {
  if (raster.rgb.size() != raster.width * raster.height * 3 || raster.width == 0 || raster.height == 0)
    throw ValidationError("encode_png: raster size does not match its dimensions");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("encode_png: libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("encode_png: libpng initialization failed");
  }
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(raster.height);
  for (std::size_t y = 0; y < raster.height; ++y)
    rows[y] = const_cast<png_bytep>(raster.rgb.data() + 3 * y * raster.width);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("encode_png: libpng error");
  }
  png_set_write_fn(png, &out, write_to_vector, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(raster.width),
               static_cast<png_uint_32>(raster.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

std::vector<std::uint8_t> render_plot(std::span<const double> values, const PlotOptions& options) {
  return encode_png(render_raster(values, options));
}

std::pair<std::size_t, std::size_t> png_dimensions(std::span<const std::uint8_t> png) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (png.size() < 24 || std::memcmp(png.data(), kSig, 8) != 0 ||
      std::memcmp(png.data() + 12, "IHDR", 4) != 0)
    throw ValidationError("not a PNG image");
  const auto be32 = [&](std::size_t o) {
    return (std::size_t{png[o]} << 24) | (std::size_t{png[o + 1]} << 16) |
           (std::size_t{png[o + 2]} << 8) | std::size_t{png[o + 3]};
  };
  return {be32(16), be32(20)};
}

}  // namespace tspl
