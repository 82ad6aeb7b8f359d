#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace sbdrift::csv {

/// Round-trip formatting (%.17g) so raw files are bit-comparable.
std::string format(double value);

/// Comma-separated writer; creates parent directories on open.
class Writer {
 public:
  Writer(const std::filesystem::path& path, std::initializer_list<std::string_view> header);
  Writer(const std::filesystem::path& path, const std::vector<std::string>& header);

  Writer& operator<<(double value);
  Writer& operator<<(int value);
  Writer& operator<<(long value);
  Writer& operator<<(unsigned long value);
  Writer& operator<<(long long value);
  Writer& operator<<(unsigned long long value);
  Writer& operator<<(bool value);
  Writer& operator<<(std::string_view value);
  Writer& operator<<(const char* value) { return *this << std::string_view(value); }
  Writer& operator<<(const std::string& value) { return *this << std::string_view(value); }

  void end_row();

 private:
  void separator();

  std::ofstream out_;
  bool row_started_ = false;
};

/// Parsed CSV: header plus string cells. Used by tests and post-processing.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

Table read(const std::filesystem::path& path);

}  // namespace sbdrift::csv
