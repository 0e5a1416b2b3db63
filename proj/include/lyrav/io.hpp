#pragma once

#include <string>

namespace lyrav::io {

// Throws IoError when the file cannot be read/written.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);
void append_line(const std::string& path, std::string_view line);

}  // namespace lyrav::io
