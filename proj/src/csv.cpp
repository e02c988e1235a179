#include "crimepass/csv.hpp"

#include "crimepass/common.hpp"

namespace crimepass::csv {

void split_line(std::string_view line, std::vector<std::string>& out) {
  out.clear();
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
}

Reader::Reader(const std::string& path) : in_(path), path_(path) {
  if (!in_) fail(ErrorKind::Io, "cannot open " + path);
  std::string line;
  if (!std::getline(in_, line)) fail(ErrorKind::MalformedRow, path + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_;
  if (line.rfind("# ", 0) == 0) {
    comment_ = line.substr(2);
    if (!std::getline(in_, line)) fail(ErrorKind::MalformedRow, path + ": missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_;
  }
  split_line(line, header_);
}

bool Reader::next(std::vector<std::string>& fields) {
  std::string line;
  for (;;) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue; // skip blank lines
    split_line(line, fields);
    return true;
  }
}

std::size_t Reader::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  fail(ErrorKind::MalformedRow, path_ + ": header is missing required column '" + name + "'");
}

int Reader::optional_column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return static_cast<int>(i);
  return -1;
}

std::string escape_field(std::string_view field) {
  bool needs_quotes = field.find_first_of(",\"\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

Writer::Writer(const std::string& path, const std::vector<std::string>& header,
               const std::string& comment)
    : out_(path, std::ios::binary), width_(header.size()) {
  if (!out_) fail(ErrorKind::Io, "cannot write " + path);
  if (!comment.empty()) out_ << "# " << comment << "\n";
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << escape_field(header[i]);
  }
  out_ << '\n';
}

void Writer::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) fail(ErrorKind::Internal, "csv row width mismatch");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << escape_field(fields[i]);
  }
  out_ << '\n';
}

void Writer::close() { out_.close(); }

} // namespace crimepass::csv
