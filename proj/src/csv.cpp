#include "litpipe/csv.hpp"

namespace litpipe {

std::vector<CsvRecord> parse_csv(std::string_view text) {
    std::vector<CsvRecord> records;
    std::size_t i = 0;
    std::size_t line = 1;
    const std::size_t n = text.size();

    while (i < n) {
        CsvRecord rec;
        rec.line = line;
        std::string field;
        bool record_done = false;
        bool field_started = false;

        while (!record_done) {
            if (i >= n) {
                if (field_started || !rec.fields.empty()) rec.fields.push_back(std::move(field));
                break;
            }
            char c = text[i];
            if (c == '"' && field.empty() && !field_started) {
                // Quoted field.
                field_started = true;
                ++i;
                bool closed = false;
                while (i < n) {
                    char q = text[i];
                    if (q == '"') {
                        if (i + 1 < n && text[i + 1] == '"') {
                            field.push_back('"');
                            i += 2;
                            continue;
                        }
                        ++i;
                        closed = true;
                        break;
                    }
                    if (q == '\n') ++line;
                    field.push_back(q);
                    ++i;
                }
                if (!closed) {
                    rec.well_formed = false;
                    rec.fields.push_back(std::move(field));
                    i = n;
                    break;
                }
                // Only a delimiter or end of record may follow a closing quote.
                if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                    rec.well_formed = false;
                    while (i < n && text[i] != ',' && text[i] != '\n') ++i;
                }
                continue;
            }
            if (c == ',') {
                rec.fields.push_back(std::move(field));
                field.clear();
                field_started = false;
                ++i;
                continue;
            }
            if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
                ++i;
                continue;
            }
            if (c == '\n') {
                ++i;
                ++line;
                rec.fields.push_back(std::move(field));
                record_done = true;
                continue;
            }
            if (c == '"') rec.well_formed = false;
            field.push_back(c);
            field_started = true;
            ++i;
        }

        bool blank = rec.fields.empty() ||
                     (rec.fields.size() == 1 && rec.fields[0].empty() && rec.well_formed);
        if (!blank) records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace litpipe
