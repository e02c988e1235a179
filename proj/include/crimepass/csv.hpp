#pragma once

#include <cstddef>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace crimepass::csv {

// RFC 4180-ish reader: comma separated, optional double-quote escaping,
// tolerates \r\n. Rows are returned as string fields; line numbers are
// 1-based and refer to physical lines (quoted newlines are not supported,
// the schemas here never need them).
class Reader {
public:
  explicit Reader(const std::string& path);

  const std::vector<std::string>& header() const { return header_; }
  // Leading "# ..." line contents, if present (artifact metadata).
  const std::string& comment() const { return comment_; }
  // Returns false at end of file. Fields are valid until the next call.
  bool next(std::vector<std::string>& fields);
  std::size_t line_number() const { return line_; }
  const std::string& path() const { return path_; }

  // Column index for a required header name; throws MalformedRow otherwise.
  std::size_t column(const std::string& name) const;
  // -1 when the column is absent.
  int optional_column(const std::string& name) const;

private:
  std::ifstream in_;
  std::string path_;
  std::string comment_;
  std::vector<std::string> header_;
  std::size_t line_ = 0;
};

void split_line(std::string_view line, std::vector<std::string>& out);

class Writer {
public:
  Writer(const std::string& path, const std::vector<std::string>& header,
         const std::string& comment = "");
  void row(const std::vector<std::string>& fields);
  void close();

private:
  std::ofstream out_;
  std::size_t width_;
};

std::string escape_field(std::string_view field);

} // namespace crimepass::csv
