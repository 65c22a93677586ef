#include "wikievents/io.hpp"

#include <zlib.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include "wikievents/error.hpp"
#include "wikievents/text.hpp"

namespace wikievents::io {
namespace {

std::string ReadGzip(const std::filesystem::path& path) {
  std::unique_ptr<gzFile_s, decltype(&gzclose)> file(
      gzopen(path.string().c_str(), "rb"), &gzclose);
  if (!file) {
    throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  }
  std::string out;
  std::array<char, 1 << 16> buf;
  for (;;) {
    const int n = gzread(file.get(), buf.data(), buf.size());
    if (n < 0) {
      throw Error(ErrorKind::kIo, "corrupt gzip stream in '" + path.string() + "'");
    }
    if (n == 0) break;
    out.append(buf.data(), static_cast<std::size_t>(n));
  }
  return out;
}

}  // namespace

std::string ReadFile(const std::filesystem::path& path) {
  if (path.extension() == ".gz") return ReadGzip(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorKind::kIo, "read failed for '" + path.string() + "'");
  }
  return buffer.str();
}

std::vector<std::string> ReadLines(const std::filesystem::path& path) {
  const std::string contents = ReadFile(path);
  std::vector<std::string> lines = text::SplitLines(contents);
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error(ErrorKind::kIo, "cannot create directory for '" +
                                      path.string() + "': " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
  }
}

}  // namespace wikievents::io
