/*
 * Copyright (C) 2026 The Transluce Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "transluce/io.hpp"

#include <png.h>
#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include "transluce/errors.hpp"

namespace transluce {

void write_pfm(const Image& img, const std::string& path) {
    if (img.empty()) throw InvalidArgumentError("write_pfm: empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_pfm: cannot open " + path);
    out << (img.channels == 3 ? "PF" : "Pf") << "\n"
        << img.width << " " << img.height << "\n"
        << "-1.0\n";
    // Scanlines bottom-to-top, little-endian float32 (scale -1.0).
    for (int y = img.height - 1; y >= 0; --y) {
        const float* row = &img.data[size_t(y) * img.width * img.channels];
        out.write(reinterpret_cast<const char*>(row),
                  std::streamsize(sizeof(float)) * img.width * img.channels);
    }
    if (!out) throw IoError("write_pfm: short write to " + path);
}

Image read_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError("read_pfm: cannot open " + path);
    std::string magic;
    in >> magic;
    int channels;
    if (magic == "PF")
        channels = 3;
    else if (magic == "Pf")
        channels = 1;
    else
        throw SchemaError("read_pfm: bad magic in " + path);
    int w = 0, h = 0;
    double scale = 0.0;
    in >> w >> h >> scale;
    if (!in || w < 1 || h < 1) throw SchemaError("read_pfm: bad header in " + path);
    if (scale >= 0.0) throw SchemaError("read_pfm: big-endian PFM unsupported: " + path);
    in.get();  // single whitespace after the scale line
    Image img(w, h, channels);
    for (int y = h - 1; y >= 0; --y) {
        float* row = &img.data[size_t(y) * w * channels];
        in.read(reinterpret_cast<char*>(row), std::streamsize(sizeof(float)) * w * channels);
    }
    if (!in) throw SchemaError("read_pfm: truncated data in " + path);
    return img;
}

namespace {

struct PngCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};

}  // namespace

void write_png(const Image& img, const std::string& path) {
    if (img.empty()) throw InvalidArgumentError("write_png: empty image");
    std::unique_ptr<FILE, PngCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("write_png: cannot open " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("write_png: encode failure for " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
                 img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<uint8_t> row(size_t(img.width) * img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width * img.channels; ++x) {
            float v = img.data[size_t(y) * img.width * img.channels + x];
            row[size_t(x)] = uint8_t(std::lround(clamp(double(v), 0.0, 1.0) * 255.0));
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image read_png(const std::string& path) {
    std::unique_ptr<FILE, PngCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw MissingFileError("read_png: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw SchemaError("read_png: decode failure for " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    png_byte color = png_get_color_type(png, info);
    png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw SchemaError("read_png: unsupported channel count in " + path);
    }

    Image img(int(w), int(h), channels);
    std::vector<uint8_t> row(size_t(w) * channels);
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (size_t x = 0; x < row.size(); ++x)
            img.data[size_t(y) * w * channels + x] = float(row[x]) / 255.0f;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

Image tonemap_preview(const Image& hdr) {
    std::vector<float> sorted(hdr.data);
    std::sort(sorted.begin(), sorted.end());
    float p95 = sorted.empty() ? 1.0f : sorted[size_t(0.95 * double(sorted.size() - 1))];
    double exposure = p95 > 1e-8f ? 1.0 / p95 : 1.0;
    Image out(hdr.width, hdr.height, hdr.channels);
    for (size_t i = 0; i < hdr.data.size(); ++i) {
        double v = clamp(double(hdr.data[i]) * exposure, 0.0, 1.0);
        out.data[i] = float(std::pow(v, 1.0 / 2.2));
    }
    return out;
}

uint32_t file_crc32(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError("file_crc32: cannot open " + path);
    uLong crc = crc32(0L, Z_NULL, 0);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        if (got > 0) crc = crc32(crc, reinterpret_cast<const Bytef*>(buf), uInt(got));
    }
    return uint32_t(crc);
}

}  // namespace transluce
