#pragma once

#include <cstdint>

namespace projlab {

/// Substream tags of the root seed, one per subcommand.
inline constexpr std::uint64_t kTheoremTag = 1;
inline constexpr std::uint64_t kProofTag = 2;
inline constexpr std::uint64_t kMomentsTag = 3;
inline constexpr std::uint64_t kAppsTag = 4;

}  // namespace projlab
