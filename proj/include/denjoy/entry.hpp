#pragma once

// Run-time backend selection. Declares the CLI entry of both library builds
// without pulling in either's types; do not mix with the other headers.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace denjoy {

#define DENJOY_DECLARE_ENTRY                                                                                \
    const std::vector<std::string>& commands();                                                            \
    int run(const std::string& command, const std::string& config_text, const std::string& out_dir,         \
            std::uint64_t seed, std::ostream& out, std::ostream& err);

inline namespace dbl {
DENJOY_DECLARE_ENTRY
}
namespace ext {
DENJOY_DECLARE_ENTRY
}

#undef DENJOY_DECLARE_ENTRY

}  // namespace denjoy
