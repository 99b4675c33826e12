#pragma once

#include <cstdint>
#include <ostream>
#include <string>

namespace jointguard::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;  // bad arguments or scenario
inline constexpr int kExitIo = 2;          // unreadable input or unwritable output
inline constexpr int kExitOrdering = 3;    // sweep results not monotone in defender count

// Digest identifying a run: scenario bytes plus the effective seed and
// active defender count.
std::string scenario_hash(const std::string& text, std::uint64_t seed, std::size_t active);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace jointguard::cli
