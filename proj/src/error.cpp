// SPDX-License-Identifier: Apache-2.0
#include "qrff/error.hpp"

namespace qrff {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidParams: return "invalid parameters";
        case Errc::OutOfRange: return "out of range";
        case Errc::EmptyStream: return "empty stream";
        case Errc::DegenerateVariance: return "degenerate variance";
        case Errc::TooShort: return "stream too short";
        case Errc::InvalidM: return "invalid block length";
        case Errc::HeterogeneousLengths: return "heterogeneous lengths";
        case Errc::FitFailure: return "fit failure";
        case Errc::NoBracket: return "no bracket";
        case Errc::InvalidDistribution: return "invalid distribution";
        case Errc::IndivisibleCount: return "indivisible count";
        case Errc::InsufficientData: return "insufficient data";
        case Errc::MalformedHeader: return "malformed header";
        case Errc::TruncatedPayload: return "truncated payload";
        case Errc::Io: return "i/o error";
        case Errc::Config: return "configuration error";
    }
    return "unknown error";
}

}  // namespace qrff
