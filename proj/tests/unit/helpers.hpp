#pragma once

#include <optional>
#include <sstream>
#include <string>

#include "abxlab/corpus_io.hpp"
#include "abxlab/error.hpp"

namespace test {

// Kind of the abxlab::Error raised by f, or nullopt when f returns normally.
template <typename F>
std::optional<abxlab::ErrorKind> error_kind(F&& f) {
    try {
        f();
    } catch (const abxlab::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

template <typename F>
std::string error_message(F&& f) {
    try {
        f();
    } catch (const abxlab::Error& e) {
        return e.what();
    }
    return {};
}

inline abxlab::FrameMatrix rows(const std::vector<std::vector<double>>& r) {
    return abxlab::FrameMatrix::from_rows(r);
}

inline abxlab::Nanoseconds ms(long long v) { return std::chrono::milliseconds(v); }

}  // namespace test
