#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace breathflow::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Index of a header column, or -1.
  int column(const std::string& name) const;
};

Table parse(std::istream& in, const std::string& source);
Table read(const std::filesystem::path& path);

std::string format(double value);

class Writer {
 public:
  Writer(const std::filesystem::path& path, const std::vector<std::string>& header);
  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  void row(const std::vector<double>& values);
  // Integer first column, as in frame_index,time_s,angle_rad.
  void row(long long first, const std::vector<double>& values);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace breathflow::csv
