#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "synchrony/errors.hpp"

namespace synchrony::tools {

namespace {

constexpr double kWidth = 960.0, kHeight = 540.0;
constexpr double kLeft = 72.0, kRight = 24.0, kTop = 46.0, kBottom = 56.0;
constexpr int kLegendCap = 10;

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string color(std::size_t i) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "hsl(%d, 65%%, 42%%)",
                static_cast<int>((i * 137 + 210) % 360));
  return buf;
}

// Largest 1-2-5 step that produces at most ~targets intervals.
double nice_step(double span, int targets) {
  const double raw = span / targets;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw) return mag * mult;
  }
  return mag * 10.0;
}

}  // namespace

void LinePlot::add(std::string label, std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorKind::DimensionMismatch, "plot series '" + label +
                                                  "' has mismatched x and y lengths");
  }
  series_.push_back(Series{std::move(label), std::move(xs), std::move(ys)});
}

std::string LinePlot::render() const {
  // Data ranges over finite (and, for log plots, positive) points.
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series_) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      const double x = s.xs[i], y = s.ys[i];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (log_y_ && y <= 0.0) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      const double t = log_y_ ? std::log10(y) : y;
      ymin = std::min(ymin, t);
      ymax = std::max(ymax, t);
    }
  }
  const bool empty = !(xmin <= xmax) || !(ymin <= ymax);
  if (empty) {
    xmin = 0.0;
    xmax = 1.0;
    ymin = 0.0;
    ymax = 1.0;
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= log_y_ ? 1.0 : 0.5;
    ymax += log_y_ ? 1.0 : 0.5;
  } else {
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto X = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  const auto Y = [&](double t) { return kTop + (ymax - t) / (ymax - ymin) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\" font-weight=\"bold\" fill=\"#222\">"
      << escape(title_) << "</text>\n";

  // Grid and ticks.
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">\n";
  if (log_y_) {
    const int d0 = static_cast<int>(std::floor(ymin));
    const int d1 = static_cast<int>(std::ceil(ymax));
    const int step = std::max(1, (d1 - d0 + 7) / 8);
    for (int d = d0; d <= d1; d += step) {
      if (d < ymin - 1e-9 || d > ymax + 1e-9) continue;
      const double y = Y(d);
      svg << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << kWidth - kRight
          << "\" y2=\"" << num(y) << "\" stroke=\"#e0e0e0\"/>\n";
      svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4)
          << "\" text-anchor=\"end\">" << tick_label(std::pow(10.0, d)) << "</text>\n";
    }
  } else {
    const double step = nice_step(ymax - ymin, 6);
    for (double v = std::ceil(ymin / step) * step; v <= ymax + 1e-12 * step; v += step) {
      const double y = Y(v);
      svg << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << kWidth - kRight
          << "\" y2=\"" << num(y) << "\" stroke=\"#e0e0e0\"/>\n";
      svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4)
          << "\" text-anchor=\"end\">" << tick_label(v) << "</text>\n";
    }
  }
  {
    const double step = nice_step(xmax - xmin, 8);
    for (double v = std::ceil(xmin / step) * step; v <= xmax + 1e-12 * step; v += step) {
      const double x = X(v);
      svg << "<line x1=\"" << num(x) << "\" y1=\"" << kTop << "\" x2=\"" << num(x)
          << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"#eeeeee\"/>\n";
      svg << "<text x=\"" << num(x) << "\" y=\"" << kHeight - kBottom + 16
          << "\" text-anchor=\"middle\">" << tick_label(v) << "</text>\n";
    }
  }
  svg << "</g>\n";

  // Axes.
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#888\"/>\n";
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "fill=\"#222\">"
      << escape(x_label_) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "fill=\"#222\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">" << escape(y_label_) << "</text>\n";

  if (empty) {
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
           "fill=\"#888\">no data</text>\n";
  }

  // Series polylines, split at gaps (non-finite or, on log plots, nonpositive).
  for (std::size_t si = 0; si < series_.size(); ++si) {
    const auto& s = series_[si];
    std::string points;
    const auto flush = [&, col = color(si)]() {
      if (points.empty()) return;
      svg << "<polyline fill=\"none\" stroke=\"" << col
          << "\" stroke-width=\"1.3\" points=\"" << points << "\"/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      const double x = s.xs[i], y = s.ys[i];
      const bool ok = std::isfinite(x) && std::isfinite(y) && (!log_y_ || y > 0.0);
      if (!ok) {
        flush();
        continue;
      }
      const double t = log_y_ ? std::log10(y) : y;
      points += num(X(x));
      points += ',';
      points += num(Y(t));
      points += ' ';
    }
    flush();
  }

  // Legend, capped so the 60-agent plots stay readable.
  const int shown = std::min<int>(kLegendCap, static_cast<int>(series_.size()));
  if (shown > 0) {
    const double lx = kWidth - kRight - 170.0, ly = kTop + 8.0;
    svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
    for (int i = 0; i < shown; ++i) {
      const double y = ly + 15.0 * i;
      svg << "<line x1=\"" << lx << "\" y1=\"" << num(y) << "\" x2=\"" << lx + 18
          << "\" y2=\"" << num(y) << "\" stroke=\"" << color(static_cast<std::size_t>(i))
          << "\" stroke-width=\"2\"/>\n";
      svg << "<text x=\"" << lx + 24 << "\" y=\"" << num(y + 4) << "\">"
          << escape(series_[static_cast<std::size_t>(i)].label) << "</text>\n";
    }
    if (static_cast<int>(series_.size()) > shown) {
      svg << "<text x=\"" << lx + 24 << "\" y=\"" << num(ly + 15.0 * shown + 4)
          << "\" fill=\"#888\">(+" << series_.size() - static_cast<std::size_t>(shown)
          << " more)</text>\n";
    }
    svg << "</g>\n";
  }

  svg << "</svg>\n";
  return svg.str();
}

void LinePlot::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::InvalidArgument, "cannot write plot file '" + path.string() + "'");
  }
  out << render();
}

}  // namespace synchrony::tools
