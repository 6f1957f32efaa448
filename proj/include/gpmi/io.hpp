#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gpmi::io {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

std::string read_file(const std::string& path);
/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);

/// FNV-1a 64 of the file bytes, hex.
std::string file_hash(const std::string& path);
std::string bytes_hash(std::string_view bytes);

/// Minimal CSV table: a header row and string cells.
struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name, or -1.
    int column(std::string_view name) const;
    /// Column index by name; throws Error(Parse) if absent.
    int require_column(std::string_view name, const std::string& context) const;
};

CsvTable read_csv(const std::string& path);

double parse_double(std::string_view text, const std::string& context);
long long parse_int(std::string_view text, const std::string& context);

} // namespace gpmi::io
