#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace clausevec {

// RFC 1321 MD5. Self-contained so that feature indices are bit-exact
// everywhere without pulling in a crypto library.
std::array<uint8_t, 16> md5_digest(std::string_view data);

std::string md5_hex(std::string_view data);

// The first 8 digest bytes as a big-endian unsigned integer.
uint64_t md5_prefix64(std::string_view data);

}  // namespace clausevec
