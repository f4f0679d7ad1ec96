#pragma once

#include <ostream>

#include "dlc/semantics.hpp"

namespace dlc {

// Lets gtest show the semantics name instead of raw bytes.
inline void PrintTo(SemanticsId s, std::ostream* os) { *os << to_string(s); }

}  // namespace dlc
