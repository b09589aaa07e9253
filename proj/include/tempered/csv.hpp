#pragma once

// Minimal CSV emission: 17 significant digits so values re-read bit-exactly,
// and the literal "inf" for infinite lifetimes.

#include <cmath>
#include <concepts>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace tempered::csv {

inline std::string format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  void header(std::initializer_list<std::string_view> cols) {
    bool first = true;
    for (auto c : cols) {
      if (!first) os_ << ',';
      os_ << c;
      first = false;
    }
    os_ << '\n';
  }

  Writer& field(std::string_view s) {
    sep();
    if (s.find_first_of(",\"\n") == std::string_view::npos) {
      os_ << s;
    } else {
      os_ << '"';
      for (char ch : s) {
        if (ch == '"') os_ << '"';
        os_ << ch;
      }
      os_ << '"';
    }
    return *this;
  }
  Writer& field(double v) { return field(std::string_view(format(v))); }
  template <std::integral I>
  Writer& field(I v) {
    return field(std::string_view(std::to_string(v)));
  }

  void end_row() {
    os_ << '\n';
    fresh_ = true;
  }

 private:
  void sep() {
    if (!fresh_) os_ << ',';
    fresh_ = false;
  }

  std::ostream& os_;
  bool fresh_ = true;
};

}  // namespace tempered::csv
