#pragma once

#include <cstdint>

namespace instrecon::detail {

// Corner i of a cell sits at offset (i & 1) ^ ((i >> 1) & 1), (i >> 1) & 1, (i >> 2) & 1
// (0..3 loop around the z = 0 face, 4..7 around z = 1). Edge e < 4 joins corners
// e and (e + 1) % 4, 4 <= e < 8 joins e and 4 + (e + 1) % 4, e >= 8 joins e - 8 and e - 4.
extern const std::uint16_t kMcEdgeTable[256];
extern const std::int8_t kMcTriTable[256][16];

}  // namespace instrecon::detail
