// SPDX-License-Identifier: Apache-2.0
#include "lapepi/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "json.hpp"

namespace lapepi {

namespace fs = std::filesystem;

Array2 Image::plane(int c) const {
    Array2 out(height, width);
    std::copy_n(planes.begin() + static_cast<std::ptrdiff_t>(c) * width * height, out.size(), out.data());
    return out;
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

void png_write_to_string(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), length);
}

void png_flush_noop(png_structp) {}

}  // namespace

Image read_png(const fs::path& path) {
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
    if (!file) throw IoError("cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed");
    }
    std::vector<png_bytep> rows;
    std::vector<unsigned char> buffer;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("corrupt PNG: " + path.string());
    }
    png_init_io(png, file.get());
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_packing(png);
    const int color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);

    Image img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    const int src_channels = png_get_channels(png, info);
    img.channels = src_channels >= 3 ? 3 : 1;
    const std::size_t stride = png_get_rowbytes(png, info);
    buffer.resize(stride * img.height);
    rows.resize(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + stride * y;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
    img.planes.assign(plane * img.channels, 0.0);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                img.planes[c * plane + static_cast<std::size_t>(y) * img.width + x] =
                    rows[static_cast<std::size_t>(y)][x * src_channels + c] / 255.0;
    return img;
}

void write_png(const fs::path& path, const Image& img) {
    if (img.channels != 1 && img.channels != 3) throw IoError("write_png: channels must be 1 or 3");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed");
    }
    std::string encoded;
    const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
    std::vector<unsigned char> row(static_cast<std::size_t>(img.width) * img.channels);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed: " + path.string());
    }
    png_set_write_fn(png, &encoded, png_write_to_string, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
                 img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                const double v = img.planes[c * plane + static_cast<std::size_t>(y) * img.width + x];
                row[static_cast<std::size_t>(x) * img.channels + c] =
                    static_cast<unsigned char>(std::clamp(std::floor(v * 255.0 + 0.5), 0.0, 255.0));
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    write_file_atomic(path, encoded);
}

void write_png(const fs::path& path, const Array2& gray) {
    Image img;
    img.width = gray.cols();
    img.height = gray.rows();
    img.channels = 1;
    img.planes = gray.values();
    write_png(path, img);
}

Array2 read_png_gray(const fs::path& path) {
    Image img = read_png(path);
    if (img.channels == 1) return img.plane(0);
    Array2 out(img.height, img.width);
    const std::size_t plane = out.size();
    for (std::size_t i = 0; i < plane; ++i)
        out.data()[i] = 0.299 * img.planes[i] + 0.587 * img.planes[plane + i] + 0.114 * img.planes[2 * plane + i];
    return out;
}

std::string Manifest::filename(int t, int s) const {
    std::string out = pattern;
    auto replace = [&](std::string_view key, int value) {
        for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key))
            out.replace(pos, key.size(), std::to_string(value));
    };
    replace("{t}", t);
    replace("{s}", s);
    return out;
}

Manifest read_manifest(const fs::path& dir) {
    const fs::path path = dir / "manifest.json";
    std::ifstream in(path);
    if (!in) throw IoError("malformed manifest: cannot open " + path.string());
    Manifest m;
    try {
        const nlohmann::json j = nlohmann::json::parse(in);
        m.rows = j.at("rows").get<int>();
        m.cols = j.at("cols").get<int>();
        m.pattern = j.at("pattern").get<std::string>();
        m.colorspace = parse_colorspace(j.value("colorspace", std::string("RGB")));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed manifest: " + std::string(e.what()));
    } catch (const Error& e) {
        throw IoError("malformed manifest: " + std::string(e.what()));
    }
    if (m.rows < 1 || m.cols < 1) throw IoError("malformed manifest: grid must be at least 1x1");
    if (m.pattern.find("{s}") == std::string::npos || (m.rows > 1 && m.pattern.find("{t}") == std::string::npos))
        throw IoError("malformed manifest: pattern must contain {s} (and {t} for 4-D grids)");
    return m;
}

void write_manifest(const fs::path& dir, const Manifest& m) {
    nlohmann::ordered_json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    j["pattern"] = m.pattern;
    j["colorspace"] = std::string(to_string(m.colorspace));
    write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

LightField4D load_lightfield(const fs::path& dir) {
    const Manifest m = read_manifest(dir);
    const int channels = m.colorspace == ColorSpace::LUMA ? 1 : 3;
    LightField4D lf;
    for (int t = 0; t < m.rows; ++t)
        for (int s = 0; s < m.cols; ++s) {
            const fs::path file = dir / m.filename(t, s);
            if (!fs::exists(file))
                throw IoError("missing view (" + std::to_string(t) + "," + std::to_string(s) + "): " + file.string());
            Image img = read_png(file);
            if (t == 0 && s == 0) {
                lf = LightField4D(m.rows, m.cols, img.height, img.width, channels,
                                  channels == 1 ? ColorSpace::LUMA : ColorSpace::RGB);
            } else if (img.height != lf.n_v() || img.width != lf.n_u()) {
                throw IoError("inconsistent spatial size: view (" + std::to_string(t) + "," + std::to_string(s) +
                              ") is " + std::to_string(img.height) + "x" + std::to_string(img.width) + ", expected " +
                              std::to_string(lf.n_v()) + "x" + std::to_string(lf.n_u()));
            }
            if (channels == 1) {
                if (img.channels == 3) {
                    lf.set_view(t, s, 0, read_png_gray(file));
                } else {
                    lf.set_view(t, s, 0, img.plane(0));
                }
            } else {
                for (int c = 0; c < 3; ++c) lf.set_view(t, s, c, img.plane(img.channels == 3 ? c : 0));
            }
        }
    if (m.colorspace == ColorSpace::YCBCR) {
        // Views on disk are always RGB; the manifest tag records the working space.
        lf.set_colorspace(ColorSpace::RGB);
    }
    return lf;
}

void save_lightfield(const fs::path& dir, const LightField4D& input, std::string_view pattern) {
    fs::create_directories(dir);
    const LightField4D lf = input.colorspace() == ColorSpace::YCBCR ? ycbcr_to_rgb(input) : input;
    Manifest m;
    m.rows = lf.n_t();
    m.cols = lf.n_s();
    m.pattern = std::string(pattern);
    m.colorspace = lf.colorspace();
    for (int t = 0; t < lf.n_t(); ++t)
        for (int s = 0; s < lf.n_s(); ++s) {
            Image img;
            img.width = lf.n_u();
            img.height = lf.n_v();
            img.channels = lf.channels();
            img.planes.reserve(static_cast<std::size_t>(img.width) * img.height * img.channels);
            for (int c = 0; c < lf.channels(); ++c) {
                const Array2 v = lf.view(t, s, c);
                img.planes.insert(img.planes.end(), v.values().begin(), v.values().end());
            }
            write_png(dir / m.filename(t, s), img);
        }
    write_manifest(dir, m);
}

}  // namespace lapepi
