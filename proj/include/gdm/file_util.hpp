#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string_view>

namespace gdm::io {

/// Writes through a temporary file next to `path` and renames it into place,
/// so readers never see a partial file. Throws DataError on failure; the
/// temporary is removed.
void write_atomic(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& write);

void write_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace gdm::io
