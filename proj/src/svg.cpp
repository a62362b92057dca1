#include "turnpike/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace turnpike {

namespace {

constexpr int kWidth = 760;
constexpr int kHeight = 460;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* kColors[] = {"#1f6fb2", "#d1495b", "#3f8f4a", "#8064a2", "#c98a1c", "#3b3b3b"};

std::string trim_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Round tick spacing to 1/2/5 times a power of ten.
double nice_step(double span) {
  if (span <= 0.0) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  if (frac < 1.5) return mag;
  if (frac < 3.5) return 2.0 * mag;
  if (frac < 7.5) return 5.0 * mag;
  return 10.0 * mag;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::add_series(std::string label, const std::vector<double>& x,
                         const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("SvgPlot: series needs matching non-empty x/y");
  }
  series_.push_back(Series{std::move(label), x, y});
}

void SvgPlot::set_reference_level(double y, std::string label) {
  reference_ = y;
  reference_label_ = std::move(label);
}

void SvgPlot::write(const std::string& path) const {
  if (series_.empty()) throw std::invalid_argument("SvgPlot: nothing to draw");
  double xmin = series_[0].x[0], xmax = xmin;
  double ymin = series_[0].y[0], ymax = ymin;
  for (const Series& s : series_) {
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (reference_) {
    ymin = std::min(ymin, *reference_);
    ymax = std::max(ymax, *reference_);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) {
    ymax += 0.5;
    ymin -= 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto px = [&](double x) { return kMarginLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  const auto py = [&](double y) { return kMarginTop + (ymax - y) / (ymax - ymin) * plot_h; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("SvgPlot: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title_ << "</text>\n";

  // axes + ticks
  out << "<g stroke=\"#444\" stroke-width=\"1\" fill=\"none\">\n";
  out << "<path d=\"M" << kMarginLeft << " " << kMarginTop << " V" << kMarginTop + plot_h << " H"
      << kMarginLeft + plot_w << "\"/>\n";
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  const double xstep = nice_step(xmax - xmin);
  for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-12; t += xstep) {
    const double gx = px(t);
    out << "<line x1=\"" << gx << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\"" << gx
        << "\" y2=\"" << kMarginTop + plot_h + 4 << "\" stroke=\"#444\"/>\n";
    out << "<line x1=\"" << gx << "\" y1=\"" << kMarginTop << "\" x2=\"" << gx << "\" y2=\""
        << kMarginTop + plot_h << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << gx << "\" y=\"" << kMarginTop + plot_h + 16
        << "\" text-anchor=\"middle\">" << trim_number(t) << "</text>\n";
  }
  const double ystep = nice_step(ymax - ymin);
  for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-12; t += ystep) {
    const double gy = py(t);
    out << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << gy << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << gy << "\" stroke=\"#444\"/>\n";
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << gy << "\" x2=\"" << kMarginLeft + plot_w
        << "\" y2=\"" << gy << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">"
        << trim_number(t) << "</text>\n";
  }
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label_ << "</text>\n";
  out << "<text x=\"16\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << kMarginTop + plot_h / 2 << ")\">" << y_label_ << "</text>\n";
  out << "</g>\n";

  if (reference_) {
    out << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(*reference_) << "\" x2=\"" << px(xmax)
        << "\" y2=\"" << py(*reference_)
        << "\" stroke=\"#777\" stroke-dasharray=\"6 4\" stroke-width=\"1\"/>\n";
  }

  for (size_t i = 0; i < series_.size(); ++i) {
    const Series& s = series_[i];
    out << "<polyline fill=\"none\" stroke=\"" << kColors[i % 6]
        << "\" stroke-width=\"1.6\" points=\"";
    for (size_t j = 0; j < s.x.size(); ++j) {
      out << px(s.x[j]) << "," << py(s.y[j]) << " ";
    }
    out << "\"/>\n";
  }

  // legend
  double ly = kMarginTop + 8;
  for (size_t i = 0; i < series_.size(); ++i) {
    out << "<line x1=\"" << kMarginLeft + plot_w - 150 << "\" y1=\"" << ly << "\" x2=\""
        << kMarginLeft + plot_w - 128 << "\" y2=\"" << ly << "\" stroke=\"" << kColors[i % 6]
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kMarginLeft + plot_w - 122 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << series_[i].label << "</text>\n";
    ly += 18;
  }
  if (reference_ && !reference_label_.empty()) {
    out << "<line x1=\"" << kMarginLeft + plot_w - 150 << "\" y1=\"" << ly << "\" x2=\""
        << kMarginLeft + plot_w - 128 << "\" y2=\"" << ly
        << "\" stroke=\"#777\" stroke-dasharray=\"6 4\"/>\n";
    out << "<text x=\"" << kMarginLeft + plot_w - 122 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << reference_label_ << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace turnpike
