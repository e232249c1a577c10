#include "coe/csv.hpp"

#include <fstream>
#include <sstream>

#include "coe/error.hpp"

namespace coe {

std::vector<CsvRecord> parse_csv(const std::string& text, const std::string& source) {
    std::vector<CsvRecord> records;
    CsvRecord current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t record_line = 1;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        current.line = record_line;
        records.push_back(std::move(current));
        current = CsvRecord{};
        record_line = line;
    };

    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                in_quotes = false;
                ++i;
                continue;
            }
            if (c == '\n') ++line;
            field += c;
            ++i;
            continue;
        }
        switch (c) {
        case '"':
            if (!field_started && field.empty()) {
                in_quotes = true;
                field_started = true;
            } else {
                field += '"'; // literal quote inside unquoted field
            }
            ++i;
            break;
        case ',':
            end_field();
            ++i;
            break;
        case '\r':
            if (i + 1 < n && text[i + 1] == '\n') ++i;
            [[fallthrough]];
        case '\n':
            ++line;
            ++i;
            end_record();
            break;
        default:
            field += c;
            field_started = true;
            ++i;
            break;
        }
    }
    if (in_quotes) {
        std::ostringstream msg;
        msg << source << ":" << record_line << ": unterminated quoted field";
        throw DatasetError(msg.str());
    }
    // Final record without trailing newline.
    if (field_started || !field.empty() || !current.fields.empty()) {
        end_record();
    }
    return records;
}

std::vector<CsvRecord> read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DatasetError(path + ": cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

} // namespace coe
