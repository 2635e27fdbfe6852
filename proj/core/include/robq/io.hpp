#pragma once

#include "robq/regression.hpp"
#include "robq/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace robq {

// CSV: one point per line, comma separated, optional header line that does
// not parse as numbers. Binary: n and d as little-endian uint32, then n*d
// little-endian float64 values in row-major order. Paths ending in .bin or
// .f64 are read as binary, anything else as CSV.
Matrix read_dataset(const std::string& path);
Matrix read_csv_matrix(const std::string& path);
Matrix read_binary_matrix(const std::string& path);
void write_binary_matrix(const std::string& path, const Matrix& X);
std::string matrix_csv(const Matrix& X);

// JSON lines, one object per round: {"round": r, "entries": [[index, value], ...]}.
std::vector<SparseUpdate> read_update_stream(const std::string& path);
std::vector<SparseUpdate> parse_update_stream(const std::string& text);
std::string update_stream_jsonl(const std::vector<SparseUpdate>& updates);

struct AtomicWriteOptions {
  // Called after the temporary file is complete and before the rename.
  // Tests throw from here to simulate a crash.
  std::function<void()> before_rename;
};

// Writes to a sibling temporary and renames it over `path`, so readers see
// either the old file or the whole new one. Throws IoError naming the path.
void write_file_atomic(const std::string& path, const std::string& content, const AtomicWriteOptions& opts = {});

std::string read_file(const std::string& path);

// Shortest text that round-trips the double.
std::string format_double(double v);

}  // namespace robq
