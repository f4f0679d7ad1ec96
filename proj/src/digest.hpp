#pragma once

#include <cstddef>
#include <string>

namespace dlc::detail {

/// Lower-case hex SHA-256 of a byte range.
std::string sha256_hex(const void* data, std::size_t size);

}  // namespace dlc::detail
