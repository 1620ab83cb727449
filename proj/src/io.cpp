#include "linedp/io.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

#include <unistd.h>

namespace linedp {

void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& body) {
    namespace fs = std::filesystem;
    if (path.has_parent_path() && !fs::exists(path.parent_path()))
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        body(out);
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw std::runtime_error("write failed for '" + path.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename into '" + path.string() + "': " + ec.message());
    }
}

}  // namespace linedp
