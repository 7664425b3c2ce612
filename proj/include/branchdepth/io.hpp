#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "branchdepth/image.hpp"

namespace branchdepth {

/// Binary PGM (P5) or PPM (P6); colour is reduced to luminance
/// 0.299 R + 0.587 G + 0.114 B. 16-bit files are rescaled to [0, 255].
GrayImage read_image(const std::filesystem::path& path);

/// Binary 8-bit PGM; values are rounded and clamped to [0, 255].
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const Mask& mask);

/// Any nonzero pixel of a PGM/PPM is set.
Mask read_mask(const std::filesystem::path& path);

/// Greyscale PFM ("Pf"), little-endian (negative scale), rows stored bottom
/// to top. Invalid disparities are written as +infinity and read back as
/// invalid, as are NaNs.
void write_pfm(const std::filesystem::path& path, const DisparityMap& map);
DisparityMap read_pfm(const std::filesystem::path& path);

/// 8-bit preview scaled so the largest valid disparity maps to 255; invalid
/// pixels are black.
GrayImage disparity_preview(const DisparityMap& map);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace branchdepth
