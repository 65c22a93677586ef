#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wikievents::io {

// Whole file; gzip-compressed when the name ends in ".gz". Throws io-error.
std::string ReadFile(const std::filesystem::path& path);

// Lines without their terminators (CR stripped too); same gzip rule.
std::vector<std::string> ReadLines(const std::filesystem::path& path);

// Creates parent directories and truncates. Throws io-error.
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace wikievents::io
