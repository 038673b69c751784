#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vcnet {

/// Streaming RFC-4180 reader: comma-delimited, double-quote quoting with
/// doubled escapes, quoted fields may contain separators and newlines.
/// Accepts both LF and CRLF record terminators.
class CsvReader {
public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  /// Reads one record into `fields`. Returns false at end of input.
  bool next_record(std::vector<std::string>& fields);

  /// 1-based number of the record most recently returned.
  size_t record_number() const noexcept { return record_; }

private:
  std::istream& in_;
  size_t record_ = 0;
};

/// Quotes a field iff it contains a separator, quote, or newline.
std::string csv_escape(const std::string& field);

void write_csv_record(std::ostream& out, std::span<const std::string> fields);

/// Shortest round-trip decimal formatting (std::to_chars).
std::string format_double(double v);

} // namespace vcnet
