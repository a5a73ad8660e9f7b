#include "facedit/training_log.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "facedit/errors.hpp"

namespace facedit {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

LossLog::LossLog(fs::path path, std::vector<std::string> columns, int keep_through)
    : path_(std::move(path)), columns_(std::move(columns)) {
  fs::create_directories(path_.parent_path());
  std::vector<std::string> kept;
  if (keep_through > 0 && fs::exists(path_)) {
    std::ifstream in(path_);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (std::stoi(line.substr(0, line.find(','))) <= keep_through) kept.push_back(line);
    }
  }
  out_.open(path_, std::ios::trunc);
  if (!out_) throw ImageIoError("cannot write loss log " + path_.string());
  out_ << "iteration";
  for (const auto& c : columns_) out_ << ',' << c;
  out_ << '\n';
  for (const auto& line : kept) out_ << line << '\n';
  out_ << std::setprecision(9);
  out_.flush();
}

void LossLog::append(int iteration, const std::vector<double>& values) {
  if (values.size() != columns_.size()) throw std::invalid_argument("loss log: column count");
  out_ << iteration;
  for (double v : values) out_ << ',' << v;
  out_ << '\n';
  out_.flush();
}

std::vector<double> LossSeries::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column '" + name + "'");
  const auto idx = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(idx));
  return out;
}

LossSeries read_loss_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ImageIoError("no loss log at " + path.string());
  LossSeries s;
  std::string line;
  std::getline(in, line);
  auto header = split_csv(line);
  if (header.empty() || header.front() != "iteration") {
    throw ImageIoError(path.string() + ": not a loss log");
  }
  s.columns.assign(header.begin() + 1, header.end());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw ImageIoError(path.string() + ": ragged row");
    s.iterations.push_back(std::stoi(cells[0]));
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(std::stod(cells[i]));
    s.rows.push_back(std::move(row));
  }
  return s;
}

SmoothedEnds smoothed_ends(const std::vector<double>& values, int window) {
  if (values.empty()) throw std::invalid_argument("smoothed_ends: empty series");
  const auto n = std::min<std::size_t>(values.size(), static_cast<std::size_t>(window));
  const auto mean = [n](auto first) { return std::accumulate(first, first + n, 0.0) / n; };
  return {mean(values.begin()), mean(values.end() - static_cast<std::ptrdiff_t>(n))};
}

}  // namespace facedit
