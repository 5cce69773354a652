#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace fsorf::csv {

// Fixed-format numeric rendering. Output files must be byte-identical across
// repeated runs, so all floating-point cells go through this one function
// (17 significant digits round-trips any double; the C locale guarantees '.').
std::string fmt(double v);
std::string fmt(long v);
std::string fmt(std::uint64_t v);

// Minimal CSV emitter: header row on open, one row() call per record.
class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& header);

  void row(const std::vector<std::string>& cells);
  void close() { out_.close(); }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace fsorf::csv
