#include "cfeval/csv.hpp"

#include "cfeval/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace cfeval::csv {

std::string format(double value) {
    if (std::isnan(value)) return "NA";
    std::array<char, 32> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw StructuralError("csv::format: to_chars failed");
    return {buf.data(), end};
}

Writer &Writer::header(std::initializer_list<std::string_view> names) {
    bool first = true;
    for (auto name : names) put_text(name, first);
    end_row();
    return *this;
}

void Writer::put_text(std::string_view text, bool &first) {
    if (!first) out_ << ',';
    out_ << text;
    first = false;
}

void Writer::end_row() { out_ << '\n'; }

namespace {

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss{line};
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

} // namespace

Table Table::read(std::istream &in) {
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw StructuralError("csv: missing header line");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.columns_ = split(line);
    for (std::size_t k = 0; k < t.columns_.size(); ++k) t.index_.emplace(t.columns_[k], k);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != t.columns_.size()) {
            throw StructuralError("csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(t.columns_.size()));
        }
        t.cells_.push_back(std::move(fields));
    }
    return t;
}

Table Table::read_file(const std::string &path) {
    std::ifstream in{path};
    if (!in) throw StructuralError("csv: cannot open " + path);
    return read(in);
}

std::size_t Table::column_index(std::string_view column) const {
    auto it = index_.find(std::string{column});
    if (it == index_.end()) throw StructuralError("csv: no column '" + std::string{column} + "'");
    return it->second;
}

const std::string &Table::text(std::size_t row, std::string_view column) const {
    return cells_.at(row).at(column_index(column));
}

double Table::number(std::size_t row, std::string_view column) const {
    const std::string &s = text(row, column);
    if (s == "NA" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw StructuralError("csv: '" + s + "' in column " + std::string{column} +
                              " is not a number");
    }
    return v;
}

long long Table::integer(std::size_t row, std::string_view column) const {
    const std::string &s = text(row, column);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw StructuralError("csv: '" + s + "' in column " + std::string{column} +
                              " is not an integer");
    }
    return v;
}

} // namespace cfeval::csv
