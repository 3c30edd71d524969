// SPDX-License-Identifier: Apache-2.0
#include "qrff/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "qrff/error.hpp"

namespace qrff::io {

namespace {

constexpr char kMagic[4] = {'Q', 'R', 'F', 'B'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    std::uint64_t bits = 0;
    if constexpr (std::is_same_v<T, double>) {
        bits = std::bit_cast<std::uint64_t>(value);
    } else {
        bits = value;
    }
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint64_t get_le(const std::uint8_t* p, std::size_t n) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v |= std::uint64_t{p[i]} << (8 * i);
    return v;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(Errc::Io, "cannot read " + path.string());
    return data;
}

}  // namespace

std::string_view name(BitFormat f) { return f == BitFormat::Packed ? "packed" : "ascii"; }

std::optional<BitFormat> format_from_name(std::string_view name) {
    if (name == "packed") return BitFormat::Packed;
    if (name == "ascii") return BitFormat::Ascii;
    return std::nullopt;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

void write_bit_file(const std::filesystem::path& path, const BitStream& bits, BitFormat format,
                    std::uint64_t config_digest) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::Io, "cannot create " + path.string());
    if (format == BitFormat::Ascii) {
        std::string text = bits.to_string();
        text += '\n';
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
    } else {
        std::vector<std::uint8_t> buf(kMagic, kMagic + 4);
        put_le(buf, kVersion);
        put_le(buf, std::uint16_t{0});
        put_le(buf, static_cast<std::uint64_t>(bits.size()));
        put_le(buf, bits.f_bg);
        put_le(buf, config_digest);
        auto payload = bits.to_bytes();
        buf.insert(buf.end(), payload.begin(), payload.end());
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    out.close();
    if (!out) fail(Errc::Io, "write failed for " + path.string());
}

BitFile read_bit_file(const std::filesystem::path& path) {
    auto data = slurp(path);
    BitFile file;
    if (data.size() < 4 || std::memcmp(data.data(), kMagic, 4) != 0) {
        file.format = BitFormat::Ascii;
        try {
            file.bits = BitStream::from_string(std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
        } catch (const Error&) {
            fail(Errc::MalformedHeader, path.string() + " is neither a packed bit file nor 0/1 text");
        }
        return file;
    }
    if (data.size() < kHeaderSize) fail(Errc::MalformedHeader, "header shorter than 32 bytes");
    BitFileHeader h;
    h.version = static_cast<std::uint16_t>(get_le(&data[4], 2));
    if (h.version != kVersion) fail(Errc::MalformedHeader, "unsupported bit file version");
    if (get_le(&data[6], 2) != 0) fail(Errc::MalformedHeader, "reserved header field is not zero");
    h.n_bits = get_le(&data[8], 8);
    h.f_bg = std::bit_cast<double>(get_le(&data[16], 8));
    h.config_digest = get_le(&data[24], 8);
    const std::size_t payload = data.size() - kHeaderSize;
    if (h.n_bits > payload * 8 || (h.n_bits + 7) / 8 != payload) {
        fail(Errc::TruncatedPayload, "payload length does not match n_bits");
    }
    file.bits = BitStream::from_bytes(std::span(data).subspan(kHeaderSize), h.n_bits);
    file.bits.f_bg = h.f_bg;
    file.header = h;
    return file;
}

}  // namespace qrff::io
