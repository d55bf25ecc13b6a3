#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "sip/errors.hpp"

namespace sip::csv {

// Shortest decimal string that round-trips to the exact double. Keeping the
// formatter in one place is what makes output files byte-reproducible.
inline std::string format(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format(std::size_t v) { return std::to_string(v); }
inline std::string format(long long v) { return std::to_string(v); }
inline const std::string& format(const std::string& v) { return v; }

inline double parse_double(std::string_view token, const std::string& where) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  // tolerate surrounding spaces from hand-edited files
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw data_error(where + ": cannot parse '" + std::string(token) + "' as a number");
  return v;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t cols() const { return header.size(); }
};

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// Read a comma-separated file with one header line and numeric body rows.
inline Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw data_error("'" + path + "' is empty");
  for (auto& h : split_line(line)) {
    while (!h.empty() && (h.back() == ' ' || h.back() == '\t')) h.pop_back();
    std::size_t b = 0;
    while (b < h.size() && (h[b] == ' ' || h[b] == '\t')) ++b;
    t.header.push_back(h.substr(b));
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    bool blank = true;
    for (char c : line)
      if (c != ' ' && c != '\t' && c != '\r') { blank = false; break; }
    if (blank) continue;
    auto toks = split_line(line);
    if (toks.size() != t.header.size())
      throw data_error("'" + path + "' line " + std::to_string(lineno) + ": expected " +
                       std::to_string(t.header.size()) + " fields, got " +
                       std::to_string(toks.size()));
    std::vector<double> row;
    row.reserve(toks.size());
    for (const auto& tok : toks)
      row.push_back(parse_double(tok, "'" + path + "' line " + std::to_string(lineno)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Row-by-row CSV writer. Keeps everything buffered in an ostringstream and
// hands the final payload to write_file_atomic-style commit on close so a
// failed run never leaves a half-written table behind.
class Writer {
public:
  explicit Writer(std::string path, const std::vector<std::string>& header)
      : path_(std::move(path)) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) buf_ << ',';
      buf_ << header[i];
    }
    buf_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... fields) {
    bool first = true;
    ((buf_ << (first ? "" : ",") << format(fields), first = false), ...);
    buf_ << '\n';
  }

  void row_vec(const std::vector<double>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) buf_ << ',';
      buf_ << format(fields[i]);
    }
    buf_ << '\n';
  }

  // Commit the buffered table to disk via a rename, so readers never observe
  // a partially written file.
  void close() {
    if (closed_) return;
    write_atomic(path_, buf_.str());
    closed_ = true;
  }

  static void write_atomic(const std::string& path, const std::string& payload) {
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw data_error("cannot open '" + tmp.string() + "' for writing");
      out << payload;
      out.flush();
      if (!out) throw data_error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw data_error("cannot move '" + tmp.string() + "' into place: " + ec.message());
  }

  ~Writer() {
    // deliberate: no commit from the destructor; an exception unwinding past
    // the writer must not publish a partial file
  }

private:
  std::string path_;
  std::ostringstream buf_;
  bool closed_ = false;
};

} // namespace sip::csv
