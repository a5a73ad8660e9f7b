#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace facedit {

/// Per-iteration CSV: `iteration,<term>...,total`.
class LossLog {
 public:
  /// Opens `path` for appending. Rows with iteration > `keep_through` are dropped
  /// first so a resumed stage continues a clean sequence; pass 0 to start over.
  LossLog(std::filesystem::path path, std::vector<std::string> columns, int keep_through);

  void append(int iteration, const std::vector<double>& values);
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::vector<std::string> columns_;
  std::ofstream out_;
};

struct LossSeries {
  std::vector<std::string> columns;  // without the iteration column
  std::vector<int> iterations;
  std::vector<std::vector<double>> rows;

  /// Values of one column; throws std::out_of_range for an unknown name.
  [[nodiscard]] std::vector<double> column(const std::string& name) const;
};

LossSeries read_loss_log(const std::filesystem::path& path);

struct SmoothedEnds {
  double start = 0.0;
  double end = 0.0;
};

/// Means of the first and last `window` values.
SmoothedEnds smoothed_ends(const std::vector<double>& values, int window);

}  // namespace facedit
