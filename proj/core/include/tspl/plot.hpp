// core/include/tspl/plot.hpp

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

#ifndef TSPL_PLOT_HPP_
#define TSPL_PLOT_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tspl {

struct PlotOptions {
  std::size_t width = 800;
  std::size_t height = 400;
  std::size_t line_width = 2;
};

/// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t* at(std::size_t x, std::size_t y) { return &rgb[3 * (y * width + x)]; }
  const std::uint8_t* at(std::size_t x, std::size_t y) const { return &rgb[3 * (y * width + x)]; }
};

inline constexpr std::uint8_t kLineColor[3] = {31, 119, 180};

/// Line plot of values against index: white background, black left and
/// bottom axes with five ticks each, values min-max normalized to the plot
/// area (a flat series sits at mid-height). Throws ValidationError on an
/// empty series or a canvas too small for the margins.
Raster render_raster(std::span<const double> values, const PlotOptions& options = {});

/// PNG encoding of a raster. No time or text chunks, so equal rasters give
/// equal bytes.
std::vector<std::uint8_t> encode_png(const Raster& raster);

/// render_raster + encode_png.
std::vector<std::uint8_t> render_plot(std::span<const double> values,
                                      const PlotOptions& options = {});

/// Width and height from a PNG's IHDR chunk. Throws ValidationError when
/// the bytes are not a PNG.
std::pair<std::size_t, std::size_t> png_dimensions(std::span<const std::uint8_t> png);

}  // namespace tspl

#endif  // TSPL_PLOT_HPP_
