#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>

namespace linedp {

// Writes through a sibling temporary file and renames it over `path`, so
// readers never observe a partially written output.  Throws on I/O failure.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& body);

}  // namespace linedp
