#pragma once

#include <filesystem>
#include <fstream>

#include "sald/error.hpp"

namespace sald {

// Opens a file for writing, creating missing parent directories.
inline std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, mode | std::ios::out);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace sald
