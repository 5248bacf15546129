// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lapepi/lightfield.hpp"

namespace lapepi {

/// 8-bit image decoded to [0, 1]; channels is 1 or 3, stored planar.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> planes;  // c * height * width + y * width + x

    Array2 plane(int c) const;
};

Image read_png(const std::filesystem::path& path);
/// Quantizes to 8 bits (round half up, clamped) and writes atomically.
void write_png(const std::filesystem::path& path, const Image& img);
void write_png(const std::filesystem::path& path, const Array2& gray);

Array2 read_png_gray(const std::filesystem::path& path);

/// On-disk light-field manifest (manifest.json in the light-field directory).
struct Manifest {
    int rows = 1;  // n_t
    int cols = 1;  // n_s
    std::string pattern = "view_{t}_{s}.png";
    ColorSpace colorspace = ColorSpace::RGB;

    std::string filename(int t, int s) const;
};

Manifest read_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const Manifest& m);

LightField4D load_lightfield(const std::filesystem::path& dir);
/// Writes PNG views plus manifest.json. YCbCr fields are converted to RGB first.
void save_lightfield(const std::filesystem::path& dir, const LightField4D& lf,
                     std::string_view pattern = "view_{t}_{s}.png");

/// Writes `contents` to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace lapepi
