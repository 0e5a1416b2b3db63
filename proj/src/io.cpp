#include "lyrav/io.hpp"

#include <fstream>
#include <sstream>

#include "lyrav/errors.hpp"

namespace lyrav::io {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed: " + path);
}

void append_line(const std::string& path, std::string_view line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open for appending: " + path);
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.put('\n');
  if (!out) throw IoError("append failed: " + path);
}

}  // namespace lyrav::io
