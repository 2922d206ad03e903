#pragma once

// Rate/quality reports. CSV columns are frozen:
//   label,qp,bitrate_kbps,map,ap_<class>...
// with one ap_ column per class seen in any curve (ascending class id) and
// empty cells for values a point does not carry.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vcmc/detmetrics.hpp"
#include "vcmc/error.hpp"

namespace vcmc::dataio {

namespace detail {

inline std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline void CheckLabel(const std::string& label) {
  if (label.find_first_of(",\n\r\"") != std::string::npos) {
    throw Error(ErrorCode::kArgument, "curve label may not contain , \" or newlines");
  }
}

}  // namespace detail

inline std::string format_rd_csv(const std::vector<det::RDCurve>& curves) {
  if (curves.empty()) throw Error(ErrorCode::kArgument, "no curves to write");
  std::set<int> classes;
  for (const auto& c : curves) {
    detail::CheckLabel(c.label);
    for (const auto& p : c.points) {
      for (const auto& [cls, ap] : p.per_class_ap) classes.insert(cls);
    }
  }
  std::string out = "label,qp,bitrate_kbps,map";
  for (int cls : classes) out += ",ap_" + std::to_string(cls);
  out += "\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out += c.label + "," + std::to_string(p.qp) + "," +
             detail::Fixed(p.bitrate_kbps, 6) + ",";
      if (p.map) out += detail::Fixed(*p.map, 6);
      for (int cls : classes) {
        out += ",";
        auto it = p.per_class_ap.find(cls);
        if (it != p.per_class_ap.end()) out += detail::Fixed(it->second, 6);
      }
      out += "\n";
    }
  }
  return out;
}

inline void WriteTextFile(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

inline void write_rd_csv(const std::vector<det::RDCurve>& curves,
                         const std::filesystem::path& path) {
  WriteTextFile(format_rd_csv(curves), path);
}

// Inverse of write_rd_csv. Curves come back in order of first appearance.
inline std::vector<det::RDCurve> read_rd_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMissingKey, path.string() + ": empty CSV");
  }
  const auto header = detail::SplitCsvLine(line);
  if (header.size() < 4 || header[0] != "label" || header[1] != "qp" ||
      header[2] != "bitrate_kbps" || header[3] != "map") {
    throw Error(ErrorCode::kMissingKey,
                path.string() + ": header must start with label,qp,bitrate_kbps,map");
  }
  std::vector<int> classes;
  for (size_t i = 4; i < header.size(); ++i) {
    if (header[i].rfind("ap_", 0) != 0) {
      throw Error(ErrorCode::kUnknownKey, path.string() + ": unexpected column " + header[i]);
    }
    try {
      classes.push_back(std::stoi(header[i].substr(3)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kTypeMismatch, path.string() + ": bad column " + header[i]);
    }
  }
  std::vector<det::RDCurve> curves;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::SplitCsvLine(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kSizeMismatch, where + ": wrong number of cells");
    }
    det::RDPoint p;
    try {
      size_t used = 0;
      p.qp = std::stoi(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("qp");
      p.bitrate_kbps = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("bitrate");
      if (!cells[3].empty()) p.map = std::stod(cells[3]);
      for (size_t k = 0; k < classes.size(); ++k) {
        if (!cells[4 + k].empty()) p.per_class_ap[classes[k]] = std::stod(cells[4 + k]);
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::kTypeMismatch, where + ": unparsable number");
    }
    auto it = std::find_if(curves.begin(), curves.end(),
                           [&](const det::RDCurve& c) { return c.label == cells[0]; });
    if (it == curves.end()) {
      curves.push_back({cells[0], {}});
      it = std::prev(curves.end());
    }
    it->points.push_back(std::move(p));
  }
  if (curves.empty()) throw Error(ErrorCode::kInsufficientPoints, path.string() + ": no rows");
  return curves;
}

namespace detail {

// Ticks at 1, 2 or 5 times a power of ten covering [lo, hi].
inline std::vector<double> NiceTicks(double lo, double hi, int target = 5) {
  if (!(hi > lo)) {
    const double pad = std::abs(lo) > 0 ? std::abs(lo) * 0.1 : 1.0;
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::floor(lo / step) * step; t <= hi + step * 0.5; t += step) {
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

inline std::string XmlEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string TickLabel(double v, double step) {
  int digits = 0;
  while (digits < 6 && std::abs(step * std::pow(10.0, digits) -
                                std::round(step * std::pow(10.0, digits))) > 1e-9) {
    ++digits;
  }
  return Fixed(v, digits);
}

}  // namespace detail

// One polyline per curve, bitrate on x, the chosen quality on y. Points
// without a finite quality value are left out.
inline std::string format_svg_plot(const std::vector<det::RDCurve>& curves,
                                   const std::string& x_label,
                                   const std::string& y_label,
                                   det::QualityAxis axis = det::QualityAxis::kMap) {
  if (curves.empty()) throw Error(ErrorCode::kArgument, "no curves to plot");
  constexpr double kW = 640, kH = 480, kLeft = 70, kRight = 20, kTop = 30,
                   kBottom = 60;
  static const char* kColors[] = {"#1f4fd8", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#17becf"};
  std::vector<std::vector<std::pair<double, double>>> series;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& c : curves) {
    auto& s = series.emplace_back();
    for (const auto& p : c.points) {
      double q = axis == det::QualityAxis::kPsnr ? p.psnr_db
                                                 : (p.map ? *p.map : NAN);
      if (!std::isfinite(q) || !std::isfinite(p.bitrate_kbps)) continue;
      s.emplace_back(p.bitrate_kbps, q);
      xmin = std::min(xmin, p.bitrate_kbps);
      xmax = std::max(xmax, p.bitrate_kbps);
      ymin = std::min(ymin, q);
      ymax = std::max(ymax, q);
    }
    std::sort(s.begin(), s.end());
  }
  if (!std::isfinite(xmin)) {
    throw Error(ErrorCode::kArgument, "no plottable points for the chosen axis");
  }
  const auto xt = detail::NiceTicks(xmin, xmax);
  const auto yt = detail::NiceTicks(ymin, ymax);
  const double x0 = xt.front(), x1 = xt.back(), y0 = yt.front(), y1 = yt.back();
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
       "viewBox=\"0 0 640 480\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  o << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  o << "<line x1=\"" << detail::Fixed(kLeft, 2) << "\" y1=\""
    << detail::Fixed(kTop + ph, 2) << "\" x2=\"" << detail::Fixed(kLeft + pw, 2)
    << "\" y2=\"" << detail::Fixed(kTop + ph, 2) << "\"/>\n";
  o << "<line x1=\"" << detail::Fixed(kLeft, 2) << "\" y1=\"" << detail::Fixed(kTop, 2)
    << "\" x2=\"" << detail::Fixed(kLeft, 2) << "\" y2=\""
    << detail::Fixed(kTop + ph, 2) << "\"/>\n";
  o << "</g>\n";
  const double xstep = xt.size() > 1 ? xt[1] - xt[0] : 1.0;
  const double ystep = yt.size() > 1 ? yt[1] - yt[0] : 1.0;
  for (double t : xt) {
    const std::string px = detail::Fixed(sx(t), 2);
    o << "<line class=\"xtick\" x1=\"" << px << "\" y1=\"" << detail::Fixed(kTop + ph, 2)
      << "\" x2=\"" << px << "\" y2=\"" << detail::Fixed(kTop + ph + 5, 2)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << px << "\" y=\"" << detail::Fixed(kTop + ph + 18, 2)
      << "\" text-anchor=\"middle\">" << detail::TickLabel(t, xstep) << "</text>\n";
  }
  for (double t : yt) {
    const std::string py = detail::Fixed(sy(t), 2);
    o << "<line class=\"ytick\" x1=\"" << detail::Fixed(kLeft - 5, 2) << "\" y1=\""
      << py << "\" x2=\"" << detail::Fixed(kLeft, 2) << "\" y2=\"" << py
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << detail::Fixed(kLeft - 8, 2) << "\" y=\"" << py
      << "\" text-anchor=\"end\" dominant-baseline=\"middle\">"
      << detail::TickLabel(t, ystep) << "</text>\n";
  }
  o << "<text x=\"" << detail::Fixed(kLeft + pw / 2, 2) << "\" y=\""
    << detail::Fixed(kH - 15, 2) << "\" text-anchor=\"middle\">" << detail::XmlEscape(x_label)
    << "</text>\n";
  o << "<text x=\"18\" y=\"" << detail::Fixed(kTop + ph / 2, 2)
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << detail::Fixed(kTop + ph / 2, 2) << ")\">" << detail::XmlEscape(y_label) << "</text>\n";
  for (size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    o << "<polyline data-label=\"" << detail::XmlEscape(curves[i].label) << "\" fill=\"none\" stroke=\""
      << color << "\" stroke-width=\"2\" points=\"";
    for (size_t k = 0; k < series[i].size(); ++k) {
      if (k) o << " ";
      o << detail::Fixed(sx(series[i][k].first), 2) << ","
        << detail::Fixed(sy(series[i][k].second), 2);
    }
    o << "\"/>\n";
    const double ly = kTop + 10 + 16.0 * static_cast<double>(i);
    o << "<text x=\"" << detail::Fixed(kLeft + pw - 10, 2) << "\" y=\""
      << detail::Fixed(ly, 2) << "\" text-anchor=\"end\" fill=\"" << color << "\">"
      << detail::XmlEscape(curves[i].label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void write_svg_plot(const std::vector<det::RDCurve>& curves,
                           const std::filesystem::path& path,
                           const std::string& x_label, const std::string& y_label,
                           det::QualityAxis axis = det::QualityAxis::kMap) {
  WriteTextFile(format_svg_plot(curves, x_label, y_label, axis), path);
}

}  // namespace vcmc::dataio
