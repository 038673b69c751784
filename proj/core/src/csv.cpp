#include "vcnet/csv.hpp"

#include "vcnet/error.hpp"

#include <charconv>
#include <istream>
#include <ostream>

namespace vcnet {

bool CsvReader::next_record(std::vector<std::string>& fields) {
  fields.clear();
  int c = in_.get();
  if (c == std::istream::traits_type::eof()) return false;
  ++record_;

  std::string field;
  bool in_quotes = false;
  bool quoted_field = false;
  for (;;) {
    if (c == std::istream::traits_type::eof()) {
      if (in_quotes)
        throw Error(Errc::malformed_row, "unterminated quoted field at record " + std::to_string(record_));
      fields.push_back(std::move(field));
      return true;
    }
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        const int peek = in_.peek();
        if (peek == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"' && field.empty() && !quoted_field) {
      in_quotes = true;
      quoted_field = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      quoted_field = false;
    } else if (ch == '\r') {
      const int peek = in_.peek();
      if (peek == '\n') in_.get();
      fields.push_back(std::move(field));
      return true;
    } else if (ch == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
    }
    c = in_.get();
  }
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_csv_record(std::ostream& out, std::span<const std::string> fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out.put(',');
    out << csv_escape(fields[i]);
  }
  out.put('\n');
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, p);
}

} // namespace vcnet
