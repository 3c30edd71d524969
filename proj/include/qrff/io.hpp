// SPDX-License-Identifier: Apache-2.0
//
// Bit files. Packed files start with a 32-byte little-endian header
//
//   0  "QRFB"
//   4  u16 version (1)
//   6  u16 reserved (0)
//   8  u64 n_bits
//  16  f64 f_bg
//  24  u64 config digest
//
// followed by ceil(n_bits / 8) payload bytes, LSB-first, last byte
// zero-padded. ASCII files hold '0' / '1' characters; whitespace is ignored.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "qrff/bitstream.hpp"

namespace qrff::io {

enum class BitFormat { Packed, Ascii };

std::string_view name(BitFormat f);
std::optional<BitFormat> format_from_name(std::string_view name);

inline constexpr std::size_t kHeaderSize = 32;
inline constexpr std::uint16_t kVersion = 1;

struct BitFileHeader {
    std::uint16_t version = kVersion;
    std::uint64_t n_bits = 0;
    double f_bg = 0.0;
    std::uint64_t config_digest = 0;
};

struct BitFile {
    BitStream bits;
    BitFormat format = BitFormat::Packed;
    std::optional<BitFileHeader> header;  ///< packed files only
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

/// Throws Error(Io) when the file cannot be written.
void write_bit_file(const std::filesystem::path& path, const BitStream& bits, BitFormat format,
                    std::uint64_t config_digest = 0);

/// Detects the format from the magic bytes. Throws Error(MalformedHeader) on
/// a bad packed header, Error(TruncatedPayload) when the payload is shorter
/// than n_bits (or longer), Error(Io) when unreadable.
BitFile read_bit_file(const std::filesystem::path& path);

}  // namespace qrff::io
