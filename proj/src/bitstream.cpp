// SPDX-License-Identifier: Apache-2.0
#include "qrff/bitstream.hpp"

#include <bit>

#include "qrff/error.hpp"
#include "qrff/kernels.hpp"

namespace qrff {

BitStream::BitStream(std::size_t n_bits, bool value)
    : words_((n_bits + 63) / 64, value ? ~std::uint64_t{0} : 0), n_bits_(n_bits) {
    if (value && (n_bits & 63) != 0) words_.back() &= (std::uint64_t{1} << (n_bits & 63)) - 1;
}

BitStream BitStream::from_string(std::string_view text) {
    BitStream out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '0' || c == '1') {
            out.push_back(c == '1');
        } else if (c != ' ' && c != '\n' && c != '\r' && c != '\t') {
            fail(Errc::InvalidParams, std::string("unexpected character in bit string: ") + c);
        }
    }
    return out;
}

void BitStream::push_back(bool value) {
    if ((n_bits_ & 63) == 0) words_.push_back(0);
    if (value) words_.back() |= std::uint64_t{1} << (n_bits_ & 63);
    ++n_bits_;
}

std::uint64_t BitStream::count_ones() const { return kernels::popcount(words_); }

std::uint64_t BitStream::count_ones(std::size_t begin, std::size_t end) const {
    if (begin >= end) return 0;
    std::size_t wb = begin >> 6;
    std::size_t we = end >> 6;
    auto low_mask = [](unsigned n) {
        return n == 0 ? std::uint64_t{0} : (~std::uint64_t{0} >> (64 - n));
    };
    if (wb == we) {
        std::uint64_t m = low_mask(end & 63) & ~low_mask(begin & 63);
        return static_cast<std::uint64_t>(std::popcount(words_[wb] & m));
    }
    std::uint64_t total = static_cast<std::uint64_t>(std::popcount(words_[wb] & ~low_mask(begin & 63)));
    total += kernels::popcount(std::span(words_).subspan(wb + 1, we - wb - 1));
    if ((end & 63) != 0) total += static_cast<std::uint64_t>(std::popcount(words_[we] & low_mask(end & 63)));
    return total;
}

BitStream BitStream::slice(std::size_t begin, std::size_t count) const {
    require(begin + count <= n_bits_, Errc::OutOfRange, "slice exceeds stream");
    BitStream out(count);
    const unsigned r = begin & 63;
    const std::size_t q = begin >> 6;
    for (std::size_t j = 0; j < out.words_.size(); ++j) {
        std::uint64_t lo = words_[q + j] >> r;
        std::uint64_t hi = (r != 0 && q + j + 1 < words_.size()) ? words_[q + j + 1] << (64 - r) : 0;
        out.words_[j] = lo | hi;
    }
    if ((count & 63) != 0) out.words_.back() &= (std::uint64_t{1} << (count & 63)) - 1;
    out.f_bg = f_bg;
    return out;
}

BitStream BitStream::complement() const {
    BitStream out = *this;
    for (auto& w : out.words_) w = ~w;
    if ((n_bits_ & 63) != 0) out.words_.back() &= (std::uint64_t{1} << (n_bits_ & 63)) - 1;
    return out;
}

std::string BitStream::to_string() const {
    std::string s(n_bits_, '0');
    for (std::size_t i = 0; i < n_bits_; ++i) {
        if ((*this)[i]) s[i] = '1';
    }
    return s;
}

std::vector<std::uint8_t> BitStream::to_bytes() const {
    std::vector<std::uint8_t> out((n_bits_ + 7) / 8);
    for (std::size_t b = 0; b < out.size(); ++b) {
        out[b] = static_cast<std::uint8_t>(words_[b >> 3] >> ((b & 7) * 8));
    }
    return out;
}

BitStream BitStream::from_bytes(std::span<const std::uint8_t> bytes, std::size_t n_bits) {
    require(bytes.size() == (n_bits + 7) / 8, Errc::TruncatedPayload,
            "payload length does not match bit count");
    BitStream out(n_bits);
    for (std::size_t b = 0; b < bytes.size(); ++b) {
        out.words_[b >> 3] |= std::uint64_t{bytes[b]} << ((b & 7) * 8);
    }
    if ((n_bits & 63) != 0) out.words_.back() &= (std::uint64_t{1} << (n_bits & 63)) - 1;
    return out;
}

}  // namespace qrff
