#include "abxlab/error.hpp"

namespace abxlab {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::argument: return "argument error";
    case ErrorKind::format: return "format error";
    case ErrorKind::consistency: return "consistency error";
    case ErrorKind::data: return "data error";
    case ErrorKind::lookup: return "lookup error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::empty_input: return "empty input";
    case ErrorKind::empty_task: return "empty task";
    case ErrorKind::undefined: return "undefined result";
    case ErrorKind::training: return "training error";
    case ErrorKind::io: return "i/o error";
    }
    return "error";
}

}  // namespace abxlab
