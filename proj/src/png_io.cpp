#include "liir/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>

namespace liir {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint8_t quantize(double v) {
    const double c = std::min(1.0, std::max(0.0, v));
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

}  // namespace

void write_png_rgb(const std::string& path, const Frame& frame) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(frame.width),
                 static_cast<png_uint_32>(frame.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(frame.width) * 3);
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x)
            for (int c = 0; c < 3; ++c)
                row[static_cast<std::size_t>(x) * 3 + static_cast<std::size_t>(c)] =
                    quantize(frame.at(y, x, c));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_png_indexed(const std::string& path, const IndexedImage& img) {
    if (img.palette.empty() || img.palette.size() > 256) {
        throw FormatError("write_png_indexed: palette must have 1..256 entries");
    }
    for (std::uint8_t idx : img.indices) {
        if (idx >= img.palette.size()) {
            throw FormatError("write_png_indexed: index outside palette");
        }
    }
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_PALETTE,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    std::vector<png_color> pal(img.palette.size());
    for (std::size_t i = 0; i < img.palette.size(); ++i) {
        pal[i].red = img.palette[i][0];
        pal[i].green = img.palette[i][1];
        pal[i].blue = img.palette[i][2];
    }
    png_set_PLTE(png, info, pal.data(), static_cast<int>(pal.size()));
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(
                               img.indices.data() +
                               static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width)));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

namespace {

struct DecodedPng {
    int height = 0;
    int width = 0;
    int channels = 0;  // after expansion: 1 (palette index) or 3 (rgb)
    bool is_palette = false;
    std::vector<std::uint8_t> pixels;  // H*W*channels
    std::vector<std::array<std::uint8_t, 3>> palette;
};

DecodedPng decode_png(const std::string& path, bool keep_palette) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open: " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("malformed PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);
    DecodedPng out;
    out.is_palette = keep_palette && color_type == PNG_COLOR_TYPE_PALETTE;

    if (out.is_palette) {
        // Keep raw indices; just unpack sub-byte depths.
        if (bit_depth < 8) png_set_packing(png);
        png_colorp pal = nullptr;
        int pal_size = 0;
        png_get_PLTE(png, info, &pal, &pal_size);
        out.palette.resize(static_cast<std::size_t>(pal_size));
        for (int i = 0; i < pal_size; ++i)
            out.palette[static_cast<std::size_t>(i)] = {pal[i].red, pal[i].green, pal[i].blue};
        out.channels = 1;
    } else {
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
            png_set_expand_gray_1_2_4_to_8(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
        if (bit_depth == 16) png_set_strip_16(png);
        if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
            png_set_gray_to_rgb(png);
        png_set_strip_alpha(png);
        out.channels = 3;
    }
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    if (rowbytes != static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.channels)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("unexpected PNG row layout: " + path);
    }
    out.pixels.resize(static_cast<std::size_t>(out.height) * rowbytes);
    std::vector<png_bytep> rows(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y)
        rows[static_cast<std::size_t>(y)] = out.pixels.data() + static_cast<std::size_t>(y) * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

}  // namespace

Frame read_png_rgb(const std::string& path) {
    DecodedPng d = decode_png(path, false);
    Frame f(d.height, d.width, ColorSpace::RGB);
    for (std::size_t p = 0; p < f.pixels() * 3; ++p)
        f.data[p] = static_cast<double>(d.pixels[p]) / 255.0;
    return f;
}

IndexedImage read_png_indexed(const std::string& path) {
    DecodedPng d = decode_png(path, true);
    IndexedImage img;
    img.height = d.height;
    img.width = d.width;
    if (d.is_palette) {
        img.indices = std::move(d.pixels);
        img.palette = std::move(d.palette);
        return img;
    }
    // RGB annotation: map distinct colors to ids, black first, rest by
    // sorted (r,g,b). Deterministic for any pixel order on disk.
    std::map<std::array<std::uint8_t, 3>, int> color_to_id;
    const std::size_t n = static_cast<std::size_t>(d.height) * static_cast<std::size_t>(d.width);
    for (std::size_t p = 0; p < n; ++p) {
        color_to_id[{d.pixels[p * 3], d.pixels[p * 3 + 1], d.pixels[p * 3 + 2]}] = 0;
    }
    if (color_to_id.size() > 256) {
        throw FormatError("annotation has more than 256 distinct colors: " + path);
    }
    // std::map iterates in sorted key order; black (0,0,0) sorts first when present.
    int next_id = 0;
    for (auto& [color, id] : color_to_id) {
        id = next_id++;
        img.palette.push_back(color);
    }
    img.indices.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        img.indices[p] = static_cast<std::uint8_t>(
            color_to_id[{d.pixels[p * 3], d.pixels[p * 3 + 1], d.pixels[p * 3 + 2]}]);
    }
    return img;
}

}  // namespace liir
