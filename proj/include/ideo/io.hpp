#pragma once

#include <string>

namespace ideo {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ideo
