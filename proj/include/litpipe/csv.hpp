#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace litpipe {

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0;  // 1-based line where the record starts
    bool well_formed = true;
};

// RFC 4180 reader: quoted fields may hold commas, doubled quotes and
// newlines; CRLF and LF line endings both accepted. A record with a stray or
// unterminated quote is returned with well_formed == false instead of
// aborting the parse. Blank lines are skipped.
std::vector<CsvRecord> parse_csv(std::string_view text);

}  // namespace litpipe
