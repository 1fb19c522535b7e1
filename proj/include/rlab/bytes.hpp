#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlab/error.hpp"

namespace rlab {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

Bytes to_bytes(std::string_view text);
std::string to_string(ByteView bytes);

std::string to_hex(ByteView bytes);
/// Throws Error(ParseError) on odd length or non-hex digits.
Bytes from_hex(std::string_view hex);

/// Big-endian append helpers shared by every binary format in the project.
void put_u8(Bytes& out, std::uint8_t v);
void put_u16(Bytes& out, std::uint16_t v);
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);
void put_bytes(Bytes& out, ByteView v);
/// u16 length prefix followed by the string octets.
void put_str16(Bytes& out, std::string_view s);

/// Bounds-checked big-endian cursor. Every read past the end throws
/// Error with the kind given at construction.
class ByteReader {
public:
    ByteReader(ByteView data, ErrorKind error_kind);

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    Bytes bytes(std::size_t n);
    std::string str16();

    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    std::size_t position() const noexcept { return pos_; }
    bool done() const noexcept { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const;

    ByteView data_;
    std::size_t pos_ = 0;
    ErrorKind error_kind_;
};

/// Offset of the first occurrence of `needle` in `hay` at or after `from`,
/// or hay.size() when absent.
std::size_t find_bytes(ByteView hay, ByteView needle, std::size_t from = 0);

}  // namespace rlab
