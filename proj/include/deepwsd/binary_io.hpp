#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deepwsd/errors.hpp"
#include "deepwsd/tensor.hpp"

namespace deepwsd {

namespace detail {

template <typename T>
T byteswap_if_big(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        std::memcpy(&v, bytes, sizeof(T));
    }
    return v;
}

} // namespace detail

/// Little-endian byte sink.
class ByteWriter {
public:
    void put_bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    void put_u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void put_u16(std::uint16_t v) { put_raw(detail::byteswap_if_big(v)); }
    void put_u32(std::uint32_t v) { put_raw(detail::byteswap_if_big(v)); }
    void put_f32s(std::span<const float> values) {
        if constexpr (std::endian::native == std::endian::little) {
            const auto* p = reinterpret_cast<const char*>(values.data());
            buf_.insert(buf_.end(), p, p + values.size_bytes());
        } else {
            for (float f : values)
                put_u32(std::bit_cast<std::uint32_t>(f));
        }
    }

    const std::vector<char>& bytes() const noexcept { return buf_; }
    std::vector<char>& bytes() noexcept { return buf_; }

private:
    template <typename T>
    void put_raw(T v) {
        char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        buf_.insert(buf_.end(), b, b + sizeof(T));
    }

    std::vector<char> buf_;
};

/// Little-endian byte source over a borrowed buffer. Reads past the end throw
/// FormatError.
class ByteReader {
public:
    ByteReader(std::span<const char> bytes, std::string what)
        : bytes_(bytes), what_(std::move(what)) {}

    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    std::string_view get_bytes(std::size_t n) {
        need(n);
        std::string_view s(bytes_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    std::uint8_t get_u8() { return static_cast<std::uint8_t>(get_bytes(1)[0]); }
    std::uint16_t get_u16() { return get_raw<std::uint16_t>(); }
    std::uint32_t get_u32() { return get_raw<std::uint32_t>(); }
    std::vector<float> get_f32s(std::size_t count) {
        if (count > remaining() / sizeof(float))
            throw FormatError(what_ + ": truncated payload");
        std::vector<float> out(count);
        std::memcpy(out.data(), bytes_.data() + pos_, count * sizeof(float));
        pos_ += count * sizeof(float);
        if constexpr (std::endian::native == std::endian::big) {
            for (float& f : out)
                f = std::bit_cast<float>(detail::byteswap_if_big(std::bit_cast<std::uint32_t>(f)));
        }
        return out;
    }

private:
    void need(std::size_t n) const {
        if (n > remaining())
            throw FormatError(what_ + ": unexpected end of data");
    }

    template <typename T>
    T get_raw() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return detail::byteswap_if_big(v);
    }

    std::span<const char> bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

inline std::vector<char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string() + " for reading");
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("error while reading " + path.string());
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const char> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out)
        throw IoError("error while writing " + path.string());
}

// ---------------------------------------------------------------------------
// DWTEN1 raw tensor files: "DWTEN1", u8 ndim, ndim x u32 dims, f32 data.

inline constexpr std::string_view kTensorMagic = "DWTEN1";

inline std::vector<char> encode_tensor(const Tensor& t) {
    if (t.rank() > 255)
        throw DimensionError("tensor rank exceeds 255");
    ByteWriter w;
    w.put_bytes(kTensorMagic);
    w.put_u8(static_cast<std::uint8_t>(t.rank()));
    for (auto d : t.dims())
        w.put_u32(d);
    w.put_f32s(t.data());
    return std::move(w.bytes());
}

inline Tensor decode_tensor(std::span<const char> bytes, const std::string& what = "tensor") {
    ByteReader r(bytes, what);
    if (bytes.size() < kTensorMagic.size() || r.get_bytes(kTensorMagic.size()) != kTensorMagic)
        throw FormatError(what + ": bad magic, expected DWTEN1");
    const std::size_t ndim = r.get_u8();
    std::vector<std::uint32_t> dims(ndim);
    for (auto& d : dims)
        d = r.get_u32();
    const std::size_t count = Tensor::element_count(dims);
    auto data = r.get_f32s(count);
    if (r.remaining() != 0)
        throw FormatError(what + ": " + std::to_string(r.remaining()) + " trailing bytes");
    return Tensor(std::move(dims), std::move(data));
}

inline void write_tensor(const std::filesystem::path& path, const Tensor& t) {
    write_file_bytes(path, encode_tensor(t));
}

inline Tensor read_tensor(const std::filesystem::path& path) {
    return decode_tensor(read_file_bytes(path), path.string());
}

} // namespace deepwsd
