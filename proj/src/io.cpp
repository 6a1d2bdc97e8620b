#include "denjoy/io.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include "denjoy/error.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

std::string fmt_real(real x) {
    char buf[64];
    if (x == 0) x = 0;  // no "-0"
    std::snprintf(buf, sizeof buf, "%.17Lg", static_cast<long double>(x));
    return buf;
}

void write_files_atomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files) {
    namespace fs = std::filesystem;
    std::vector<fs::path> temps;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& [path, contents] : files) {
        fs::path tmp = path;
        tmp += ".tmp";
        temps.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << contents;
        out.close();
        if (!out) {
            cleanup();
            fail(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
        }
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::error_code ec;
        fs::rename(temps[i], files[i].first, ec);
        if (ec) {
            cleanup();
            fail(ErrorKind::InvalidArgument, "cannot rename onto " + files[i].first.string());
        }
    }
}

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
