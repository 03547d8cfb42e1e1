#include "fanlab/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fanlab/errors.hpp"

namespace fanlab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double_or_throw(std::string_view token, const std::string& source,
                             std::size_t line_no) {
  token = trim(token);
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || token.empty()) {
    throw ParseError(source + ":" + std::to_string(line_no) +
                         ": cannot parse '" + std::string(token) +
                         "' as a real number",
                     line_no);
  }
  if (!std::isfinite(value)) {
    throw ParseError(source + ":" + std::to_string(line_no) +
                         ": non-finite value '" + std::string(token) + "'",
                     line_no);
  }
  return value;
}

// Parses "# rows=<m> cols=<n>"; returns false when the comment is not a
// shape header (plain comments are skipped by the caller).
bool parse_shape_header(std::string_view line, std::size_t* rows,
                        std::size_t* cols) {
  line = trim(line);
  if (line.empty() || line.front() != '#') return false;
  line.remove_prefix(1);
  line = trim(line);
  auto read_field = [&](std::string_view key) -> long long {
    if (line.substr(0, key.size()) != key) return -1;
    line.remove_prefix(key.size());
    long long v = -1;
    const char* first = line.data();
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) return -1;
    line.remove_prefix(static_cast<std::size_t>(ptr - first));
    line = trim(line);
    return v;
  };
  const long long m = read_field("rows=");
  if (m < 0) return false;
  const long long n = read_field("cols=");
  if (n < 0) return false;
  if (!line.empty()) return false;
  *rows = static_cast<std::size_t>(m);
  *cols = static_cast<std::size_t>(n);
  return true;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

DenseMatrix parse_matrix_csv(const std::string& text, const std::string& source) {
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool have_header = false;
  std::size_t header_rows = 0, header_cols = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string_view raw(text.data() + pos,
                               (eol == std::string::npos ? text.size() : eol) - pos);
    pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
    ++line_no;

    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!have_header && rows == 0 &&
          parse_shape_header(line, &header_rows, &header_cols)) {
        have_header = true;
      }
      continue;  // plain comments are ignored
    }

    std::size_t row_cols = 0;
    std::size_t field_start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        data.push_back(parse_double_or_throw(
            line.substr(field_start, i - field_start), source, line_no));
        ++row_cols;
        field_start = i + 1;
      }
    }
    if (rows == 0) {
      cols = row_cols;
    } else if (row_cols != cols) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(cols) + " columns, found " +
                           std::to_string(row_cols),
                       line_no);
    }
    ++rows;
  }

  if (rows == 0 || cols == 0) {
    throw ParseError(source + ": no matrix rows found", line_no);
  }
  if (have_header && (header_rows != rows || header_cols != cols)) {
    throw ParseError(source + ": header declares " + std::to_string(header_rows) +
                         "x" + std::to_string(header_cols) + " but data is " +
                         std::to_string(rows) + "x" + std::to_string(cols),
                     line_no);
  }
  return DenseMatrix(rows, cols, std::move(data));
}

DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
  return parse_matrix_csv(read_text_file(path), path.string());
}

void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m) {
  if (m.empty()) {
    throw InvalidInputError("write_matrix_csv: empty matrix");
  }
  std::string out;
  out.reserve(m.size() * 12 + 32);
  out += "# rows=" + std::to_string(m.rows()) +
         " cols=" + std::to_string(m.cols()) + "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

void write_key_value_file(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  for (const auto& [k, v] : pairs) out += k + "=" + v + "\n";
  write_text_file(path, out);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path.string() + ": cannot open file", 0);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw Error("short write to '" + path.string() + "'");
  }
}

}  // namespace fanlab
