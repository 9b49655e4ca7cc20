#include "thermo/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace thermo::svg {
namespace {

constexpr double kWidth = 720, kHeight = 460;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double m = 0.04 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

struct Frame {
  Range x, y;
  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
  double py(double v) const { return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom); }
};

std::string header(const Axes& axes) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(axes.title) +
       "</text>\n";
  s += "<text x=\"" + num(kLeft + (kWidth - kLeft - kRight) / 2) + "\" y=\"" + num(kHeight - 15) +
       "\" text-anchor=\"middle\">" + escape(axes.x_label) + "</text>\n";
  s += "<text transform=\"translate(18," + num(kTop + (kHeight - kTop - kBottom) / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(axes.y_label) + "</text>\n";
  return s;
}

// Tick positions at 1, 2 or 5 times a power of ten, about five per axis.
std::vector<double> nice_ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

std::string frame_and_ticks(const Frame& f, bool x_ticks) {
  std::string s;
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(kWidth - kLeft - kRight) +
       "\" height=\"" + num(kHeight - kTop - kBottom) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double yv : nice_ticks(f.y.lo, f.y.hi)) {
    s += "<line x1=\"" + num(kLeft - 4) + "\" y1=\"" + num(f.py(yv)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
         num(f.py(yv)) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(f.py(yv) + 4) + "\" text-anchor=\"end\">" +
         tick_label(yv) + "</text>\n";
  }
  if (!x_ticks) return s;
  for (double xv : nice_ticks(f.x.lo, f.x.hi)) {
    s += "<line x1=\"" + num(f.px(xv)) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" + num(f.px(xv)) +
         "\" y2=\"" + num(kHeight - kBottom + 4) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(kHeight - kBottom + 18) + "\" text-anchor=\"middle\">" +
         tick_label(xv) + "</text>\n";
  }
  return s;
}

}  // namespace

std::string line_chart(const Axes& axes, const std::vector<Series>& series) {
  Frame f;
  for (const auto& s : series) {
    for (double v : s.x) f.x.add(v);
    for (double v : s.y) f.y.add(v);
  }
  f.x.pad();
  f.y.pad();
  std::string out = header(axes) + frame_and_ticks(f, true);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < series[k].x.size() && i < series[k].y.size(); ++i) {
      if (!std::isfinite(series[k].y[i])) continue;
      points += num(f.px(series[k].x[i])) + "," + num(f.py(series[k].y[i])) + " ";
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + points +
           "\"/>\n";
    const double ly = kTop + 14 + 18.0 * static_cast<double>(k);
    out += "<line x1=\"" + num(kWidth - kRight + 12) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
           num(kWidth - kRight + 32) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(kWidth - kRight + 38) + "\" y=\"" + num(ly) + "\">" + escape(series[k].label) +
           "</text>\n";
  }
  return out + "</svg>\n";
}

std::string box_plot(const Axes& axes, const std::vector<std::string>& labels, const std::vector<BoxStats>& boxes) {
  Frame f;
  f.x.lo = 0.0;
  f.x.hi = static_cast<double>(boxes.size());
  for (const auto& b : boxes) {
    f.y.add(b.min);
    f.y.add(b.max);
  }
  f.y.pad();
  std::string out = header(axes) + frame_and_ticks(f, false);
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const auto& b = boxes[k];
    const double c = f.px(static_cast<double>(k) + 0.5);
    const double half = 0.3 * (f.px(1.0) - f.px(0.0));
    out += "<line x1=\"" + num(c) + "\" y1=\"" + num(f.py(b.max)) + "\" x2=\"" + num(c) + "\" y2=\"" +
           num(f.py(b.min)) + "\" stroke=\"black\"/>\n";
    for (double w : {b.min, b.max}) {
      out += "<line x1=\"" + num(c - half / 2) + "\" y1=\"" + num(f.py(w)) + "\" x2=\"" + num(c + half / 2) +
             "\" y2=\"" + num(f.py(w)) + "\" stroke=\"black\"/>\n";
    }
    out += "<rect x=\"" + num(c - half) + "\" y=\"" + num(f.py(b.q3)) + "\" width=\"" + num(2 * half) +
           "\" height=\"" + num(std::max(0.5, f.py(b.q1) - f.py(b.q3))) +
           "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + num(c - half) + "\" y1=\"" + num(f.py(b.median)) + "\" x2=\"" + num(c + half) +
           "\" y2=\"" + num(f.py(b.median)) + "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(c) + "\" y=\"" + num(kHeight - kBottom + 18) + "\" text-anchor=\"middle\">" +
           escape(k < labels.size() ? labels[k] : std::string()) + "</text>\n";
  }
  return out + "</svg>\n";
}

std::array<int, 3> ramp(double t) {
  static constexpr std::array<std::array<int, 3>, 5> stops{
      {{0x30, 0x12, 0x3b}, {0x46, 0x86, 0xfb}, {0x1a, 0xe4, 0xb6}, {0xf9, 0xba, 0x38}, {0x7a, 0x04, 0x03}}};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const double s = t * 4.0;
  const auto i = std::min<std::size_t>(3, static_cast<std::size_t>(s));
  const double r = s - static_cast<double>(i);
  std::array<int, 3> c{};
  for (int k = 0; k < 3; ++k) c[k] = static_cast<int>(std::lround(stops[i][k] + r * (stops[i + 1][k] - stops[i][k])));
  return c;
}

std::string heatmap(const Axes& axes, const std::vector<double>& u, const std::vector<double>& v,
                    const std::vector<double>& values) {
  Frame f;
  Range vr;
  for (double x : u) f.x.add(x);
  for (double y : v) f.y.add(y);
  for (double t : values) vr.add(t);
  if (!std::isfinite(vr.lo)) vr.lo = 0.0, vr.hi = 1.0;
  if (vr.hi == vr.lo) vr.hi = vr.lo + 1.0;
  std::string out = header(axes) + frame_and_ticks(f, true);
  const double du = u.size() > 1 ? (u.back() - u.front()) / static_cast<double>(u.size() - 1) : 1.0;
  const double dv = v.size() > 1 ? (v.back() - v.front()) / static_cast<double>(v.size() - 1) : 1.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double t = values[j * u.size() + i];
      std::string fill = "#bdbdbd";
      if (std::isfinite(t)) {
        const auto c = ramp((t - vr.lo) / (vr.hi - vr.lo));
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
        fill = buf;
      }
      const double x0 = f.px(std::max(f.x.lo, u[i] - du / 2)), x1 = f.px(std::min(f.x.hi, u[i] + du / 2));
      const double y0 = f.py(std::min(f.y.hi, v[j] + dv / 2)), y1 = f.py(std::max(f.y.lo, v[j] - dv / 2));
      out += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(x1 - x0 + 0.3) + "\" height=\"" +
             num(y1 - y0 + 0.3) + "\" fill=\"" + fill + "\"/>\n";
    }
  }
  // colour bar
  const double bx = kWidth - kRight + 30, bh = kHeight - kTop - kBottom;
  for (int k = 0; k < 50; ++k) {
    const auto c = ramp((k + 0.5) / 50.0);
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
    out += "<rect x=\"" + num(bx) + "\" y=\"" + num(kTop + bh * (1.0 - (k + 1) / 50.0)) +
           "\" width=\"18\" height=\"" + num(bh / 50.0 + 0.3) + "\" fill=\"" + buf + "\"/>\n";
  }
  out += "<text x=\"" + num(bx + 24) + "\" y=\"" + num(kTop + 10) + "\">" + tick_label(vr.hi) + "</text>\n";
  out += "<text x=\"" + num(bx + 24) + "\" y=\"" + num(kTop + bh) + "\">" + tick_label(vr.lo) + "</text>\n";
  return out + "</svg>\n";
}

}  // namespace thermo::svg
