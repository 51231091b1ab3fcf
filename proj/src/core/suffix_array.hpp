#pragma once

#include <cstdint>
#include <vector>

namespace cluedex {

// Suffix array over an integer sequence via SA-IS, linear in n + sigma.
// Requirements: text ends with a unique smallest symbol (0 exactly once,
// at the last position), all symbols < sigma.
std::vector<std::uint64_t> build_suffix_array(const std::vector<std::uint32_t>& text,
                                              std::uint32_t sigma);

}  // namespace cluedex
