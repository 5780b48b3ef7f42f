#include "csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "breathflow/error.hpp"

namespace breathflow::csv {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

Table parse(std::istream& in, const std::string& source) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw LoadError(source + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != c.size() || c.empty() || !std::isfinite(v))
        throw LoadError(source + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw LoadError(source + ": empty CSV");
  return t;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  return parse(in, path.string());
}

std::string format(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

struct Writer::Impl {
  std::ofstream out;
  std::filesystem::path path;
};

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string>& header)
    : impl_(std::make_unique<Impl>()) {
  impl_->out.open(path);
  impl_->path = path;
  if (!impl_->out) throw LoadError("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) impl_->out << (i ? "," : "") << header[i];
  impl_->out << '\n';
}

Writer::~Writer() = default;

void Writer::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) impl_->out << (i ? "," : "") << format(values[i]);
  impl_->out << '\n';
}

void Writer::row(long long first, const std::vector<double>& values) {
  impl_->out << first;
  for (double v : values) impl_->out << ',' << format(v);
  impl_->out << '\n';
}

}  // namespace breathflow::csv
