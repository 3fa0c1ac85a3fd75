#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "deepwsd/errors.hpp"

namespace deepwsd::csv {

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, LF or CRLF line
/// endings. Blank lines are skipped. A leading UTF-8 BOM is ignored.
inline std::vector<std::vector<std::string>> parse(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF"))
        text.remove_prefix(3);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    const auto end_row = [&] {
        if (field_started || !row.empty()) {
            row.push_back(std::move(field));
            rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        field_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            row.push_back(std::move(field));
            field.clear();
            field_started = true;
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n')
                break;
            end_row();
            break;
        case '\n':
            end_row();
            break;
        default:
            field.push_back(ch);
            field_started = true;
        }
    }
    if (in_quotes)
        throw FormatError("CSV: unterminated quoted field");
    end_row();
    return rows;
}

inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"')
            out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

inline std::string join(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0)
            line.push_back(',');
        line += escape(fields[i]);
    }
    return line;
}

} // namespace deepwsd::csv
