#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <zlib.h>

#include "deepwsd/binary_io.hpp"
#include "deepwsd/errors.hpp"
#include "deepwsd/tensor.hpp"

namespace deepwsd {

struct ConvLayerSpec {
    std::string_view name;
    std::uint32_t in_channels;
    std::uint32_t out_channels;
};

/// The thirteen 3x3 convolutions of VGG16, grouped into five blocks.
inline constexpr std::array<std::array<ConvLayerSpec, 3>, 5> kVggBlocks{{
    {{{"conv1_1", 3, 64}, {"conv1_2", 64, 64}, {"", 0, 0}}},
    {{{"conv2_1", 64, 128}, {"conv2_2", 128, 128}, {"", 0, 0}}},
    {{{"conv3_1", 128, 256}, {"conv3_2", 256, 256}, {"conv3_3", 256, 256}}},
    {{{"conv4_1", 256, 512}, {"conv4_2", 512, 512}, {"conv4_3", 512, 512}}},
    {{{"conv5_1", 512, 512}, {"conv5_2", 512, 512}, {"conv5_3", 512, 512}}},
}};

inline std::vector<ConvLayerSpec> vgg_conv_layers() {
    std::vector<ConvLayerSpec> layers;
    for (const auto& block : kVggBlocks)
        for (const auto& layer : block)
            if (!layer.name.empty())
                layers.push_back(layer);
    return layers;
}

/// Name and canonical shape of every tensor a backbone archive must carry, in
/// archive order (weight then bias per layer).
inline std::vector<std::pair<std::string, std::vector<std::uint32_t>>> canonical_weight_schema() {
    std::vector<std::pair<std::string, std::vector<std::uint32_t>>> schema;
    for (const auto& layer : vgg_conv_layers()) {
        const std::string base(layer.name);
        schema.emplace_back(base + ".weight",
                            std::vector<std::uint32_t>{layer.out_channels, layer.in_channels, 3, 3});
        schema.emplace_back(base + ".bias", std::vector<std::uint32_t>{layer.out_channels});
    }
    return schema;
}

inline constexpr std::string_view kArchiveMagic{"DWSDW1\0", 7};

inline std::uint32_t crc32_of(std::span<const char> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks to stay within range
    std::size_t off = 0;
    while (off < bytes.size()) {
        const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
        crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off),
                      static_cast<uInt>(n));
        off += n;
    }
    return static_cast<std::uint32_t>(crc);
}

/// Ordered, named collection of backbone tensors. Immutable once built.
class WeightArchive {
public:
    using Entry = std::pair<std::string, Tensor>;

    WeightArchive() = default;
    explicit WeightArchive(std::vector<Entry> entries, std::uint32_t checksum = 0)
        : entries_(std::move(entries)), checksum_(checksum) {
        std::unordered_set<std::string> seen;
        for (const auto& [name, t] : entries_) {
            if (!seen.insert(name).second)
                throw SchemaError("duplicate tensor name '" + name + "' in weight archive");
            if (t.rank() < 1 || t.rank() > 4)
                throw SchemaError("tensor '" + name + "' has unsupported rank " +
                                  std::to_string(t.rank()));
        }
    }

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::uint32_t checksum() const noexcept { return checksum_; }

    const Tensor* find(std::string_view name) const noexcept {
        for (const auto& [n, t] : entries_)
            if (n == name)
                return &t;
        return nullptr;
    }

    const Tensor& at(std::string_view name) const {
        if (const Tensor* t = find(name))
            return *t;
        throw SchemaError("weight archive is missing tensor '" + std::string(name) + "'");
    }

    /// Throws SchemaError naming the first missing or mis-shaped backbone tensor.
    void validate_backbone() const {
        for (const auto& [name, dims] : canonical_weight_schema()) {
            const Tensor& t = at(name);
            if (t.dims() != dims) {
                std::string got;
                for (auto d : t.dims())
                    got += (got.empty() ? "" : "x") + std::to_string(d);
                std::string want;
                for (auto d : dims)
                    want += (want.empty() ? "" : "x") + std::to_string(d);
                throw SchemaError("tensor '" + name + "' has shape " + got + ", expected " + want);
            }
        }
    }

private:
    std::vector<Entry> entries_;
    std::uint32_t checksum_ = 0;
};

/// Serializes entries in the DWSDW1 layout. Does not require the backbone schema,
/// so partial archives can be produced for testing.
inline std::vector<char> encode_archive(const std::vector<WeightArchive::Entry>& entries) {
    ByteWriter w;
    w.put_bytes(kArchiveMagic);
    w.put_u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& [name, t] : entries) {
        if (name.size() > 0xFFFF)
            throw SchemaError("tensor name too long: " + name.substr(0, 32) + "...");
        w.put_u16(static_cast<std::uint16_t>(name.size()));
        w.put_bytes(name);
        w.put_u8(static_cast<std::uint8_t>(t.rank()));
        for (auto d : t.dims())
            w.put_u32(d);
        w.put_f32s(t.data());
    }
    auto& bytes = w.bytes();
    const std::uint32_t crc = crc32_of(std::span<const char>(bytes).subspan(kArchiveMagic.size()));
    w.put_u32(crc);
    return std::move(w.bytes());
}

/// Parses and checks magic and CRC, without backbone schema validation.
inline WeightArchive decode_archive(std::span<const char> bytes,
                                    const std::string& what = "weight archive") {
    if (bytes.size() < kArchiveMagic.size() ||
        std::string_view(bytes.data(), kArchiveMagic.size()) != kArchiveMagic)
        throw FormatError(what + ": bad magic, expected DWSDW1");
    if (bytes.size() < kArchiveMagic.size() + 8)
        throw FormatError(what + ": truncated archive");

    const auto body = bytes.subspan(kArchiveMagic.size(), bytes.size() - kArchiveMagic.size() - 4);
    ByteReader tail(bytes.subspan(bytes.size() - 4), what);
    const std::uint32_t stored = tail.get_u32();
    const std::uint32_t actual = crc32_of(body);
    if (stored != actual)
        throw CorruptionError(what + ": CRC-32 mismatch (stored " + std::to_string(stored) +
                              ", computed " + std::to_string(actual) + ")");

    ByteReader r(body, what);
    const std::uint32_t count = r.get_u32();
    std::vector<WeightArchive::Entry> entries;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint16_t len = r.get_u16();
        std::string name(r.get_bytes(len));
        const std::size_t ndim = r.get_u8();
        std::vector<std::uint32_t> dims(ndim);
        for (auto& d : dims)
            d = r.get_u32();
        auto data = r.get_f32s(Tensor::element_count(dims));
        entries.emplace_back(std::move(name), Tensor(std::move(dims), std::move(data)));
    }
    if (r.remaining() != 0)
        throw FormatError(what + ": " + std::to_string(r.remaining()) +
                          " unexpected bytes after the last entry");
    return WeightArchive(std::move(entries), stored);
}

inline void write_archive(const std::filesystem::path& path,
                          const std::vector<WeightArchive::Entry>& entries) {
    write_file_bytes(path, encode_archive(entries));
}

/// Loads a backbone archive: magic, CRC and all 26 canonical tensors are checked.
inline WeightArchive load_weights(const std::filesystem::path& path) {
    auto archive = decode_archive(read_file_bytes(path), path.string());
    archive.validate_backbone();
    return archive;
}

/// Deterministic synthetic backbone weights. Kernel values are uniform with unit
/// variance scaled by 1/sqrt(fan_in); biases are uniform in [-0.01, 0.01]. Only
/// mt19937_64 bits and exact arithmetic are used, so a seed maps to the same
/// bytes with any standard library.
inline std::vector<WeightArchive::Entry> make_test_weights(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto unit = [&rng] {
        // 53 random bits -> [0, 1)
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    std::vector<WeightArchive::Entry> entries;
    for (const auto& [name, dims] : canonical_weight_schema()) {
        Tensor t(dims);
        if (dims.size() == 4) {
            const double fan_in = static_cast<double>(dims[1]) * dims[2] * dims[3];
            const double half_width = std::sqrt(3.0) / std::sqrt(fan_in);
            for (float& v : t.data())
                v = static_cast<float>((2.0 * unit() - 1.0) * half_width);
        } else {
            for (float& v : t.data())
                v = static_cast<float>((2.0 * unit() - 1.0) * 0.01);
        }
        entries.emplace_back(name, std::move(t));
    }
    return entries;
}

inline WeightArchive gen_test_weights(std::uint64_t seed, const std::filesystem::path& path) {
    const auto bytes = encode_archive(make_test_weights(seed));
    write_file_bytes(path, bytes);
    auto archive = decode_archive(bytes, path.string());
    archive.validate_backbone();
    return archive;
}

} // namespace deepwsd
