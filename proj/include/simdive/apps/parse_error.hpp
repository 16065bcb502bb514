#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace simdive {

/// Malformed or truncated input file; offset is the byte where parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t offset, const std::string& what)
        : std::runtime_error(source + ": " + what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

} // namespace simdive
