#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace convgemm {

// Signed indices throughout: padding arithmetic (i_h*s + i_kh - p) must be
// allowed to go negative.
using index_t = std::int64_t;

inline constexpr index_t ceil_div(index_t a, index_t b) { return (a + b - 1) / b; }

struct InvalidGeometry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AllocationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    ParseError(int line_no, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
          line(line_no) {}
    int line;
};

struct UnknownLayerKind : ParseError {
    UnknownLayerKind(int line_no, const std::string& kind)
        : ParseError(line_no, "unknown layer kind '" + kind + "'") {}
};

}  // namespace convgemm
