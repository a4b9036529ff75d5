#pragma once

// Tiny dependency-free SVG line plots: linear or log10 y axis, 1-2-5 tick
// spacing, rotating series colors, and a capped legend.  Good enough for the
// run artifacts; not a general plotting library.

#include <filesystem>
#include <string>
#include <vector>

namespace synchrony::tools {

class LinePlot {
 public:
  LinePlot(std::string title, std::string x_label, std::string y_label, bool log_y = false)
      : title_(std::move(title)),
        x_label_(std::move(x_label)),
        y_label_(std::move(y_label)),
        log_y_(log_y) {}

  void add(std::string label, std::vector<double> xs, std::vector<double> ys);
  std::string render() const;
  void save(const std::filesystem::path& path) const;

 private:
  struct Series {
    std::string label;
    std::vector<double> xs, ys;
  };

  std::string title_, x_label_, y_label_;
  bool log_y_ = false;
  std::vector<Series> series_;
};

}  // namespace synchrony::tools
