#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "trmflow/errors.hpp"

namespace trm {

// Write-then-rename so that readers never observe a partially written file.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open " + tmp.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

}  // namespace trm
