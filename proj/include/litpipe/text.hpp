#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace litpipe {

// Number of maximal runs of non-whitespace characters.
std::size_t count_words(std::string_view text);

std::vector<std::string_view> split_whitespace(std::string_view text);

std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);

bool starts_with_word_char(std::string_view text);

// Reads a whole file; throws IoError.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace litpipe
