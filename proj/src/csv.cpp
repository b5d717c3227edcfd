#include "sentdyn/csv.hpp"

#include <sstream>

#include "sentdyn/error.hpp"

namespace sentdyn {

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot write '" + path + "'");
}

CsvWriter& CsvWriter::header(std::initializer_list<std::string_view> columns) {
    for (auto c : columns) cell(c);
    end_row();
    return *this;
}

CsvWriter& CsvWriter::header(const std::vector<std::string>& columns) {
    for (const auto& c : columns) cell(c);
    end_row();
    return *this;
}

CsvWriter& CsvWriter::cell(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return raw(s);
    std::string quoted = "\"";
    for (char ch : s) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return raw(quoted);
}

CsvWriter& CsvWriter::raw(std::string_view s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    first_ = true;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw DataError("missing CSV column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.columns = split(line);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto row = split(line);
        if (row.size() != t.columns.size()) throw DataError("ragged row in '" + path + "'");
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace sentdyn
