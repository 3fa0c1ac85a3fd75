#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <png.h>

#include "deepwsd/binary_io.hpp"
#include "deepwsd/errors.hpp"
#include "deepwsd/tensor.hpp"

namespace deepwsd {

/// Decoding failures (unsupported or malformed image files).
class ImageDecodeError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline ImageTensor interleaved_rgb_to_tensor(const std::uint8_t* rgb, std::size_t h,
                                             std::size_t w) {
    ImageTensor img(3, h, w);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                img.at(c, y, x) = rgb[(y * w + x) * 3 + c];
    return img;
}

inline std::vector<std::uint8_t> tensor_to_interleaved_rgb(const ImageTensor& img) {
    if (img.channels() != 3 && img.channels() != 1)
        throw DimensionError("image export expects 1 or 3 channels, got " + img.shape_string());
    std::vector<std::uint8_t> rgb(img.height() * img.width() * 3);
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x)
            for (std::size_t c = 0; c < 3; ++c) {
                const float v = img.at(img.channels() == 1 ? 0 : c, y, x);
                const float r = std::nearbyint(std::clamp(v, 0.0f, 255.0f));
                rgb[(y * img.width() + x) * 3 + c] = static_cast<std::uint8_t>(r);
            }
    return rgb;
}

inline ImageTensor decode_png(const std::vector<char>& bytes, const std::string& what) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw ImageDecodeError(what + ": " + image.message);
    if (image.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&image);
        throw ImageDecodeError(what + ": only 8-bit PNG images are supported");
    }
    // Alpha, if any, is composited onto black; grayscale is replicated.
    image.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(image));
    png_color black{0, 0, 0};
    if (!png_image_finish_read(&image, &black, rgb.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw ImageDecodeError(what + ": " + msg);
    }
    return interleaved_rgb_to_tensor(rgb.data(), image.height, image.width);
}

inline ImageTensor decode_bmp(const std::vector<char>& bytes, const std::string& what) {
    try {
        ByteReader r(bytes, what);
        r.get_bytes(2); // "BM"
        r.get_u32();    // file size, unreliable in the wild
        r.get_u32();    // reserved
        const std::uint32_t pixel_offset = r.get_u32();
        const std::uint32_t dib_size = r.get_u32();
        if (dib_size < 40)
            throw ImageDecodeError(what + ": unsupported BMP header (OS/2 style)");
        const auto width = static_cast<std::int32_t>(r.get_u32());
        const auto height = static_cast<std::int32_t>(r.get_u32());
        r.get_u16(); // planes
        const std::uint16_t bpp = r.get_u16();
        const std::uint32_t compression = r.get_u32();
        r.get_u32(); // image size
        r.get_u32(); // x ppm
        r.get_u32(); // y ppm
        std::uint32_t colors_used = r.get_u32();

        if (width <= 0 || height == 0)
            throw ImageDecodeError(what + ": invalid BMP dimensions");
        if (bpp != 8 && bpp != 24 && bpp != 32)
            throw ImageDecodeError(what + ": unsupported BMP bit depth " + std::to_string(bpp));
        if (!(compression == 0 || (compression == 3 && bpp == 32)))
            throw ImageDecodeError(what + ": compressed BMP is not supported");

        std::vector<std::uint8_t> palette;
        if (bpp == 8) {
            if (colors_used == 0 || colors_used > 256)
                colors_used = 256;
            const std::size_t palette_at = 14 + dib_size;
            if (palette_at + colors_used * 4 > bytes.size())
                throw ImageDecodeError(what + ": truncated BMP palette");
            palette.assign(bytes.begin() + static_cast<std::ptrdiff_t>(palette_at),
                           bytes.begin() + static_cast<std::ptrdiff_t>(palette_at + colors_used * 4));
        }

        const bool top_down = height < 0;
        const std::size_t w = static_cast<std::size_t>(width);
        const std::size_t h = static_cast<std::size_t>(top_down ? -static_cast<std::int64_t>(height)
                                                                : height);
        const std::size_t stride = (w * bpp / 8 + 3) / 4 * 4;
        if (pixel_offset + stride * h > bytes.size())
            throw ImageDecodeError(what + ": truncated BMP pixel data");

        ImageTensor img(3, h, w);
        for (std::size_t row = 0; row < h; ++row) {
            const std::size_t y = top_down ? row : h - 1 - row;
            const auto* src = reinterpret_cast<const std::uint8_t*>(bytes.data()) + pixel_offset +
                              row * stride;
            for (std::size_t x = 0; x < w; ++x) {
                std::uint8_t b, g, rr;
                if (bpp == 8) {
                    const std::size_t idx = src[x];
                    if (idx * 4 + 2 >= palette.size())
                        throw ImageDecodeError(what + ": BMP palette index out of range");
                    b = palette[idx * 4];
                    g = palette[idx * 4 + 1];
                    rr = palette[idx * 4 + 2];
                } else {
                    const std::size_t px = x * (bpp / 8);
                    b = src[px];
                    g = src[px + 1];
                    rr = src[px + 2];
                }
                img.at(0, y, x) = rr;
                img.at(1, y, x) = g;
                img.at(2, y, x) = b;
            }
        }
        return img;
    } catch (const FormatError& e) {
        throw ImageDecodeError(e.what());
    }
}

} // namespace detail

/// Decodes an 8-bit PNG or BMP file into a 3 x H x W tensor with values 0..255.
inline ImageTensor read_image(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    const std::string what = path.string();
    static constexpr unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_sig, 8) == 0)
        return detail::decode_png(bytes, what);
    if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M')
        return detail::decode_bmp(bytes, what);
    throw ImageDecodeError(what + ": not a PNG or BMP file");
}

/// Writes a 0..255 tensor (1 or 3 channels) as an 8-bit RGB PNG; values are
/// rounded and clamped.
inline void write_png(const std::filesystem::path& path, const ImageTensor& img) {
    auto rgb = detail::tensor_to_interleaved_rgb(img);
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, rgb.data(), 0, nullptr))
        throw IoError(path.string() + ": " + image.message);
}

/// Writes a 0..255 tensor as a 24-bit bottom-up BMP.
inline void write_bmp(const std::filesystem::path& path, const ImageTensor& img) {
    const auto rgb = detail::tensor_to_interleaved_rgb(img);
    const std::size_t w = img.width();
    const std::size_t h = img.height();
    const std::size_t stride = (w * 3 + 3) / 4 * 4;
    ByteWriter out;
    out.put_bytes("BM");
    out.put_u32(static_cast<std::uint32_t>(54 + stride * h));
    out.put_u32(0);
    out.put_u32(54);
    out.put_u32(40);
    out.put_u32(static_cast<std::uint32_t>(w));
    out.put_u32(static_cast<std::uint32_t>(h));
    out.put_u16(1);
    out.put_u16(24);
    out.put_u32(0);
    out.put_u32(static_cast<std::uint32_t>(stride * h));
    out.put_u32(2835);
    out.put_u32(2835);
    out.put_u32(0);
    out.put_u32(0);
    for (std::size_t row = 0; row < h; ++row) {
        const std::size_t y = h - 1 - row;
        for (std::size_t x = 0; x < w; ++x) {
            const std::uint8_t* p = &rgb[(y * w + x) * 3];
            out.put_u8(p[2]);
            out.put_u8(p[1]);
            out.put_u8(p[0]);
        }
        for (std::size_t pad = w * 3; pad < stride; ++pad)
            out.put_u8(0);
    }
    write_file_bytes(path, out.bytes());
}

inline ImageTensor scale_to_unit(ImageTensor img) {
    for (float& v : img.data())
        v /= 255.0f;
    return img;
}

} // namespace deepwsd
