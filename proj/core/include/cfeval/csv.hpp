#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <vector>

namespace cfeval::csv {

/// Shortest decimal text that round-trips to the same double; "NA" for NaN.
std::string format(double value);

/// Writes comma-separated rows. Fields are emitted verbatim; none of the
/// tables produced here contain commas or quotes.
class Writer {
  public:
    explicit Writer(std::ostream &out) : out_{out} {}

    Writer &header(std::initializer_list<std::string_view> names);

    template <typename... Fields>
    Writer &row(const Fields &...fields) {
        bool first = true;
        (put(fields, first), ...);
        end_row();
        return *this;
    }

  private:
    void put(double v, bool &first) { put_text(format(v), first); }
    void put(const std::string &v, bool &first) { put_text(v, first); }
    void put(const char *v, bool &first) { put_text(v, first); }
    void put(std::string_view v, bool &first) { put_text(v, first); }
    void put(bool v, bool &first) { put_text(v ? "1" : "0", first); }
    template <typename Int>
    void put(Int v, bool &first) requires std::is_integral_v<Int> {
        put_text(std::to_string(v), first);
    }
    void put_text(std::string_view text, bool &first);
    void end_row();

    std::ostream &out_;
};

/// An in-memory table read from CSV text with a header line.
class Table {
  public:
    static Table read(std::istream &in);
    static Table read_file(const std::string &path);

    std::size_t rows() const noexcept { return cells_.size(); }
    const std::vector<std::string> &columns() const noexcept { return columns_; }

    const std::string &text(std::size_t row, std::string_view column) const;
    double number(std::size_t row, std::string_view column) const;
    long long integer(std::size_t row, std::string_view column) const;

  private:
    std::size_t column_index(std::string_view column) const;

    std::vector<std::string> columns_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::string>> cells_;
};

} // namespace cfeval::csv
