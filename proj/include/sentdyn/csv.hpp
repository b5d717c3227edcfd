#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace sentdyn {

// Shortest round-trip representation; identical bytes for identical values.
inline std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);

    CsvWriter& header(std::initializer_list<std::string_view> columns);
    CsvWriter& header(const std::vector<std::string>& columns);

    CsvWriter& cell(std::string_view s);
    CsvWriter& cell(const char* s) { return cell(std::string_view(s)); }
    CsvWriter& cell(const std::string& s) { return cell(std::string_view(s)); }
    CsvWriter& cell(double v) { return raw(format_number(v)); }
    CsvWriter& cell(std::int64_t v) { return raw(std::to_string(v)); }
    CsvWriter& cell(std::size_t v) { return raw(std::to_string(v)); }
    CsvWriter& cell(int v) { return raw(std::to_string(v)); }
    CsvWriter& cell(bool v) { return raw(v ? "true" : "false"); }
    void end_row();

private:
    CsvWriter& raw(std::string_view s);

    std::ofstream out_;
    bool first_ = true;
};

// Minimal reader for the files this project writes: comma separated, no
// quoted commas. Returns rows without the header.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::string& path);

} // namespace sentdyn
