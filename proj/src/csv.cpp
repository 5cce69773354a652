#include "fsorf/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace fsorf::csv {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // Shortest representation that round-trips the exact double; to_chars is
  // locale-independent, so the byte output never varies between runs.
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(long v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

Writer::Writer(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
  if (!out_) throw std::runtime_error("csv: cannot open " + path);
  row(header);
}

void Writer::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw std::invalid_argument("csv: row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

}  // namespace fsorf::csv
