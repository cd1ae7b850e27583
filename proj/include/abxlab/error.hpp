#pragma once

#include <stdexcept>
#include <string>

namespace abxlab {

enum class ErrorKind {
    argument,     // caller passed an invalid value or config
    format,       // file does not follow its documented layout
    consistency,  // files disagree with each other (dim, period)
    data,         // values are malformed (non-finite, bad row)
    lookup,       // referenced utterance/phone does not exist
    validation,   // structural invariant violated (overlap, duplicates)
    empty_input,  // nothing to work with
    empty_task,   // ABX task produced no scorable cell
    undefined,    // metric is mathematically undefined for the input
    training,     // APC optimisation diverged
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace abxlab
