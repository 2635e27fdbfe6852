#include "robq/io.hpp"

#include "robq/errors.hpp"

#include <json.hpp>

#include <array>
#include <cerrno>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

namespace robq {

namespace {

std::string cause() { return std::strerror(errno); }

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

bool parse_number(std::string_view field, double& out) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading: " + cause());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path + ": read failed");
  return ss.str();
}

Matrix read_csv_matrix(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    std::vector<double> row;
    bool ok = true;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      double v = 0.0;
      const std::string_view field(line.data() + start,
                                   (comma == std::string::npos ? line.size() : comma) - start);
      if (!parse_number(field, v)) {
        ok = false;
        break;
      }
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!ok) {
      if (rows == 0 && values.empty()) continue;  // header
      throw IoError(path + ":" + std::to_string(line_no) + ": malformed number");
    }
    if (cols == 0) cols = row.size();
    if (row.size() != cols) {
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols) + " columns");
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw IoError(path + ": no data rows");
  Matrix X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
  }
  return X;
}

Matrix read_binary_matrix(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 8) throw IoError(path + ": truncated header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t n = read_u32le(p);
  const std::uint32_t d = read_u32le(p + 4);
  const std::uint64_t expected = 8 + 8ull * n * d;
  if (bytes.size() != expected) {
    throw IoError(path + ": expected " + std::to_string(expected) + " bytes for " + std::to_string(n) + "x" +
                  std::to_string(d) + ", found " + std::to_string(bytes.size()));
  }
  Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const unsigned char* q = p + 8;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < d; ++j, q += 8) {
      std::uint64_t bits = 0;
      for (int b = 7; b >= 0; --b) bits = (bits << 8) | q[b];
      double v;
      std::memcpy(&v, &bits, sizeof v);
      X(i, j) = v;
    }
  }
  return X;
}

void write_binary_matrix(const std::string& path, const Matrix& X) {
  std::string out;
  out.reserve(8 + 8 * static_cast<std::size_t>(X.size()));
  auto put_u32 = [&](std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
  };
  put_u32(static_cast<std::uint32_t>(X.rows()));
  put_u32(static_cast<std::uint32_t>(X.cols()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      std::uint64_t bits;
      const double v = X(i, j);
      std::memcpy(&bits, &v, sizeof bits);
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
  }
  write_file_atomic(path, out);
}

Matrix read_dataset(const std::string& path) {
  Matrix X = (ends_with(path, ".bin") || ends_with(path, ".f64")) ? read_binary_matrix(path) : read_csv_matrix(path);
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    if (!std::isfinite(X.data()[i])) throw IoError(path + ": non-finite value");
  }
  return X;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

std::string matrix_csv(const Matrix& X) {
  std::string out;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (j > 0) out.push_back(',');
      out += format_double(X(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<SparseUpdate> parse_update_stream(const std::string& text) {
  std::vector<SparseUpdate> out;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      SparseUpdate upd;
      for (const auto& e : obj.at("entries")) {
        if (!e.is_array() || e.size() != 2) throw IoError("entry must be [index, value]");
        const auto idx = e.at(0).get<long long>();
        if (idx < 0) throw IoError("negative index");
        upd.entries.emplace_back(static_cast<std::size_t>(idx), e.at(1).get<double>());
      }
      out.push_back(std::move(upd));
    } catch (const nlohmann::json::exception& ex) {
      throw IoError("update stream line " + std::to_string(line_no) + ": " + ex.what());
    } catch (const IoError& ex) {
      throw IoError("update stream line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<SparseUpdate> read_update_stream(const std::string& path) {
  try {
    return parse_update_stream(read_file(path));
  } catch (const IoError& ex) {
    const std::string msg = ex.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw IoError(path + ": " + msg);
  }
}

std::string update_stream_jsonl(const std::vector<SparseUpdate>& updates) {
  std::string out;
  for (std::size_t r = 0; r < updates.size(); ++r) {
    nlohmann::json obj;
    obj["round"] = r + 1;
    obj["entries"] = nlohmann::json::array();
    for (const auto& [i, v] : updates[r].entries) obj["entries"].push_back({i, v});
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content, const AtomicWriteOptions& opts) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path + ": cannot create temporary file " + tmp.string() + ": " + cause());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError(path + ": write failed: " + cause());
    }
  }
  try {
    if (opts.before_rename) opts.before_rename();
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw IoError(path + ": rename failed: " + ec.message());
  }
}

}  // namespace robq
