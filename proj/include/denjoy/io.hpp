#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "denjoy/real.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

// 17 significant digits, locale independent
std::string fmt_real(real x);

// Writes every (path, contents) pair to a temp file first, then renames
// them all; nothing is renamed if any write fails.
void write_files_atomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files);

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
