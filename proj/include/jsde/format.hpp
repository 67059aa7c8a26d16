#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>

namespace jsde {

/// Shortest round-trip decimal form of a double. Locale independent.
inline std::string format_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// Minimal CSV row writer; fields are written as given, numbers via format_number.
class CsvRow {
  public:
    explicit CsvRow(std::ostream& os) : os_(os) {}
    ~CsvRow() { os_ << '\n'; }
    CsvRow(const CsvRow&) = delete;
    CsvRow& operator=(const CsvRow&) = delete;

    CsvRow& operator<<(double x) { return field(format_number(x)); }
    CsvRow& operator<<(std::size_t x) { return field(std::to_string(x)); }
    CsvRow& operator<<(int x) { return field(std::to_string(x)); }
    CsvRow& operator<<(unsigned x) { return field(std::to_string(x)); }
    CsvRow& operator<<(const std::string& s) { return field(s); }
    CsvRow& operator<<(const char* s) { return field(s); }

  private:
    CsvRow& field(const std::string& s) {
        if (!first_) {
            os_ << ',';
        }
        first_ = false;
        os_ << s;
        return *this;
    }

    std::ostream& os_;
    bool first_ = true;
};

}  // namespace jsde
