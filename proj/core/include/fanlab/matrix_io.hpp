#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fanlab/dense_matrix.hpp"

namespace fanlab {

// Shortest decimal representation that round-trips to the same double
// (via std::to_chars). Locale-free and deterministic.
std::string format_double(double value);

// Matrix CSV: one matrix row per line, comma separated, preceded by the
// optional header "# rows=<m> cols=<n>". The writer always emits the header;
// the reader accepts files with or without it.
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_matrix_csv(const std::filesystem::path& path);

// Parses matrix CSV content from memory; `source` names the input in errors.
DenseMatrix parse_matrix_csv(const std::string& text, const std::string& source);

// Plain "key=value" sidecar files (one pair per line, written in given order).
void write_key_value_file(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::string& comment = "");

// Reads a whole file; raises fanlab::Error if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fanlab
