#pragma once

#include <string>
#include <vector>

namespace coe {

/// One parsed CSV record plus the physical line number (1-based) where it
/// started, for diagnostics. Quoted fields may span lines, so consecutive
/// records are not necessarily on consecutive lines.
struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

/// RFC 4180 reader over an in-memory buffer. Quoted fields may contain
/// commas, CR/LF and doubled quotes. Accepts LF, CRLF and CR record
/// terminators. A quote inside an unquoted field is taken literally.
/// Throws DatasetError (with `source` + line) on an unterminated quote.
std::vector<CsvRecord> parse_csv(const std::string& text, const std::string& source);

/// Reads and parses a whole file; throws DatasetError if unreadable.
std::vector<CsvRecord> read_csv_file(const std::string& path);

/// Quotes a field per RFC 4180 when it contains a comma, quote or newline.
std::string csv_escape(const std::string& field);

} // namespace coe
