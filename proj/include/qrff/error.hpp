// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qrff {

enum class Errc {
    InvalidParams,
    OutOfRange,
    EmptyStream,
    DegenerateVariance,
    TooShort,
    InvalidM,
    HeterogeneousLengths,
    FitFailure,
    NoBracket,
    InvalidDistribution,
    IndivisibleCount,
    InsufficientData,
    MalformedHeader,
    TruncatedPayload,
    Io,
    Config,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const char* what) {
    if (!ok) fail(code, what);
}

}  // namespace qrff
