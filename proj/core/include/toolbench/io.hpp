#pragma once

#include <string>
#include <vector>

namespace toolbench {

// Line-delimited file helpers. Lines are written LF-separated with a
// trailing LF; readers drop the final empty segment.
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);
std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

}  // namespace toolbench
