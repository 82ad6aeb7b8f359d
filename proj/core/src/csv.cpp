#include "sbdrift/csv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace sbdrift::csv {

std::string format(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::ofstream open(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

Writer::Writer(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
    : out_(open(path)) {
  for (auto h : header) *this << h;
  end_row();
}

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(open(path)) {
  for (const auto& h : header) *this << std::string_view(h);
  end_row();
}

void Writer::separator() {
  if (row_started_) out_ << ',';
  row_started_ = true;
}

Writer& Writer::operator<<(double value) {
  separator();
  out_ << format(value);
  return *this;
}

Writer& Writer::operator<<(int value) { return *this << static_cast<long long>(value); }
Writer& Writer::operator<<(long value) { return *this << static_cast<long long>(value); }
Writer& Writer::operator<<(unsigned long value) {
  return *this << static_cast<unsigned long long>(value);
}

Writer& Writer::operator<<(long long value) {
  separator();
  out_ << value;
  return *this;
}

Writer& Writer::operator<<(unsigned long long value) {
  separator();
  out_ << value;
  return *this;
}

Writer& Writer::operator<<(bool value) {
  separator();
  out_ << (value ? 1 : 0);
  return *this;
}

Writer& Writer::operator<<(std::string_view value) {
  separator();
  out_ << value;
  return *this;
}

void Writer::end_row() {
  out_ << '\n';
  row_started_ = false;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("no column named " + std::string(name));
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Table table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else if (!cells.empty()) {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

}  // namespace sbdrift::csv
