#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sbill/errors.hpp"
#include "sbill/point2.hpp"

namespace sbill {

/// Minimal SVG canvas in data coordinates.
class SvgPlot {
 public:
  SvgPlot(double x0, double x1, double y0, double y1, int width = 800, int height = 500, bool equal_aspect = false)
      : x0_(x0), x1_(x1), y0_(y0), y1_(y1), w_(width), h_(height) {
    if (y1_ <= y0_) {
      y0_ -= 0.5;
      y1_ += 0.5;
    }
    if (equal_aspect) {
      const double sx = (x1_ - x0_) / (w_ - 2 * kMargin), sy = (y1_ - y0_) / (h_ - 2 * kMargin);
      const double s = std::max(sx, sy);
      const double cx = 0.5 * (x0_ + x1_), cy = 0.5 * (y0_ + y1_);
      x0_ = cx - 0.5 * s * (w_ - 2 * kMargin);
      x1_ = cx + 0.5 * s * (w_ - 2 * kMargin);
      y0_ = cy - 0.5 * s * (h_ - 2 * kMargin);
      y1_ = cy + 0.5 * s * (h_ - 2 * kMargin);
    }
    body_.precision(6);
    body_ << std::fixed;
  }

  void polyline(const std::vector<Point2>& pts, const std::string& color, double width = 1.2, bool closed = false) {
    body_ << (closed ? "<polygon" : "<polyline") << " fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
          << width << "\" points=\"";
    for (const auto& p : pts) body_ << px(p.x) << ',' << py(p.y) << ' ';
    body_ << "\"/>\n";
  }

  void line(Point2 a, Point2 b, const std::string& color, double width = 1.0) {
    body_ << "<line x1=\"" << px(a.x) << "\" y1=\"" << py(a.y) << "\" x2=\"" << px(b.x) << "\" y2=\"" << py(b.y)
          << "\" stroke=\"" << color << "\" stroke-width=\"" << width << "\"/>\n";
  }

  void marker(Point2 p, const std::string& color, double r = 3.0) {
    body_ << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y) << "\" r=\"" << r << "\" fill=\"" << color
          << "\"/>\n";
  }

  void label(const std::string& text, int x, int y) {
    body_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\"13\">" << text
          << "</text>\n";
  }

  void axes() {
    body_ << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << w_ - 2 * kMargin << "\" height=\""
          << h_ - 2 * kMargin << "\" fill=\"none\" stroke=\"#999\"/>\n";
  }

  void write(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_ << "\" viewBox=\"0 0 "
       << w_ << ' ' << h_ << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << body_.str() << "</svg>\n";
  }

 private:
  static constexpr int kMargin = 30;
  double px(double x) const { return kMargin + (x - x0_) / (x1_ - x0_) * (w_ - 2 * kMargin); }
  double py(double y) const { return h_ - kMargin - (y - y0_) / (y1_ - y0_) * (h_ - 2 * kMargin); }

  double x0_, x1_, y0_, y1_;
  int w_, h_;
  std::ostringstream body_;
};

}  // namespace sbill
