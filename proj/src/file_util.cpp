#include "gdm/file_util.hpp"

#include <fstream>
#include <random>
#include <string>
#include <system_error>

#include "gdm/errors.hpp"

namespace gdm::io {

void write_atomic(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& write) {
  namespace fs = std::filesystem;
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    try {
      write(out);
    } catch (...) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw;
    }
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DataError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw DataError("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  write_atomic(path, [contents](std::ostream& out) { out << contents; });
}

}  // namespace gdm::io
