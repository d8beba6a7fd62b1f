#include "hdisp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hdisp {

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw std::invalid_argument("CsvTable: row width mismatch");
  rows_.push_back(std::move(cells));
  return *this;
}

CsvTable& CsvTable::row(const std::vector<double>& cells) {
  std::vector<std::string> text;
  for (double v : cells) text.push_back(format_number(v));
  return row(std::move(text));
}

std::string CsvTable::str() const {
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;

std::string esc(const std::string& s) {
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

std::string fmt(double v, int prec = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

struct Axis {
  bool log;
  double lo, hi;  // in transformed units
  double map(double v) const { return log ? std::log10(v) : v; }
};

Axis make_axis(const std::vector<double>& a, const std::vector<double>& b, bool log) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto* v : {&a, &b})
    for (double x : *v) {
      if (log && !(x > 0.0)) continue;
      const double t = log ? std::log10(x) : x;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  if (!(hi >= lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double pad = 0.05 * (hi - lo);
  return {log, lo - pad, hi + pad};
}

std::vector<double> ticks(const Axis& ax) {
  const double span = ax.hi - ax.lo;
  const double base = std::pow(10.0, std::floor(std::log10(span / 5.0)));
  double step = 10.0 * base;
  for (double m : {1.0, 2.0, 5.0})
    if (span / (m * base) <= 8.0) {
      step = m * base;
      break;
    }
  // whole decades on log axes whenever the range allows
  if (ax.log && span >= 2.0) step = std::max(1.0, std::round(step));
  std::vector<double> out;
  for (double v = std::ceil(ax.lo / step) * step; v <= ax.hi + 1e-12; v += step) out.push_back(v);
  return out;
}

std::string tick_label(const Axis& ax, double t) {
  if (!ax.log) return fmt(t);
  if (std::abs(t - std::round(t)) < 1e-9) return "1e" + fmt(std::round(t), 3);
  return fmt(std::pow(10.0, t), 3);
}

}  // namespace

std::string render_svg(const PlotSpec& p) {
  const Axis ax = make_axis(p.x, p.fit_x, p.log_x);
  const Axis ay = make_axis(p.y, p.fit_y, p.log_y);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto X = [&](double v) { return kLeft + (ax.map(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  const auto Y = [&](double v) { return kTop + (1.0 - (ay.map(v) - ay.lo) / (ay.hi - ay.lo)) * ph; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << esc(p.title) << "</text>\n";
  s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ticks(ax)) {
    const double px = kLeft + (t - ax.lo) / (ax.hi - ax.lo) * pw;
    s << "<line x1=\"" << px << "\" y1=\"" << kTop + ph << "\" x2=\"" << px << "\" y2=\""
      << kTop + ph + 5 << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << px << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
      << tick_label(ax, t) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double py = kTop + (1.0 - (t - ay.lo) / (ay.hi - ay.lo)) * ph;
    s << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py << "\" x2=\"" << kLeft << "\" y2=\"" << py
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << kLeft - 8 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
      << tick_label(ay, t) << "</text>\n";
  }
  s << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15
    << "\" text-anchor=\"middle\">" << esc(p.x_label) << "</text>\n";
  s << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << kTop + ph / 2 << ")\">" << esc(p.y_label) << "</text>\n";

  if (p.fit_x.size() >= 2 && p.fit_x.size() == p.fit_y.size()) {
    s << "<path fill=\"none\" stroke=\"#c03020\" stroke-width=\"1.5\" d=\"";
    for (std::size_t i = 0; i < p.fit_x.size(); ++i)
      s << (i ? " L" : "M") << X(p.fit_x[i]) << ' ' << Y(p.fit_y[i]);
    s << "\"/>\n";
  }
  for (std::size_t i = 0; i < std::min(p.x.size(), p.y.size()); ++i) {
    if ((p.log_x && !(p.x[i] > 0)) || (p.log_y && !(p.y[i] > 0))) continue;
    s << "<circle cx=\"" << X(p.x[i]) << "\" cy=\"" << Y(p.y[i])
      << "\" r=\"3.5\" fill=\"#2050a0\"/>\n";
  }
  if (!p.annotation.empty())
    s << "<text x=\"" << kLeft + pw - 8 << "\" y=\"" << kTop + 18 << "\" text-anchor=\"end\">"
      << esc(p.annotation) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

void write_svg(const std::filesystem::path& path, const PlotSpec& plot) {
  write_text(path, render_svg(plot));
}

}  // namespace hdisp
