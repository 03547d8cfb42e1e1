#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "fanlab/matrix_io.hpp"

namespace fanlab::cli {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = kWidth - 180.0;  // room for the legend
constexpr double kTop = 46.0;
constexpr double kBottom = kHeight - 52.0;

struct Curve {
  const char* label;
  const char* color;
  const std::vector<double>* values;
};

struct RefLine {
  const char* label;
  const char* color;
  double value;
};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_value(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void text(std::string& out, double x, double y, const std::string& body,
          const char* anchor = "start", const std::string& extra = "") {
  out += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" text-anchor=\"" +
         anchor + "\"" + extra + ">" + body + "</text>\n";
}

void line(std::string& out, double x1, double y1, double x2, double y2,
          const char* style) {
  out += "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" +
         fmt(x2) + "\" y2=\"" + fmt(y2) + "\" " + style + "/>\n";
}

}  // namespace

void write_spectrum_svg(const std::string& path,
                        const SpectralReport& report) {
  const Curve curves[] = {
      {"base F", "#1f77b4", &report.sigma_base},
      {"noise GN", "#7f7f7f", &report.sigma_noise},
      {"noisy F+GN", "#d62728", &report.sigma_noisy},
  };
  std::vector<RefLine> refs;
  if (report.mp_lower > 0.0) {
    refs.push_back({"MP lower edge", "#2ca02c", report.mp_lower});
  }
  if (report.mp_upper > 0.0) {
    refs.push_back({"MP upper edge", "#2ca02c", report.mp_upper});
  }
  if (report.tau_star > 0.0) {
    refs.push_back({"tau*", "#9467bd", report.tau_star});
  }

  // Plotted range over every positive value; log axes cannot show zeros.
  double vmin = HUGE_VAL;
  double vmax = 0.0;
  std::size_t max_len = 0;
  for (const Curve& c : curves) {
    max_len = std::max(max_len, c.values->size());
    for (double v : *c.values) {
      if (v > 0.0) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
    }
  }
  for (const RefLine& r : refs) {
    vmin = std::min(vmin, r.value);
    vmax = std::max(vmax, r.value);
  }

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fmt_value(kWidth) + "\" height=\"" + fmt_value(kHeight) +
         "\" viewBox=\"0 0 " + fmt_value(kWidth) + " " + fmt_value(kHeight) +
         "\" font-family=\"monospace\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  text(out, kLeft, 22.0,
       "singular values (log-log)  m=" + std::to_string(report.m) +
           " n=" + std::to_string(report.n) +
           " alpha=" + fmt_value(report.alpha));

  if (!(vmax > 0.0) || max_len == 0) {
    text(out, kLeft, kHeight / 2.0, "no positive singular values to plot");
    out += "</svg>\n";
    write_text_file(path, out);
    return;
  }

  double ly0 = std::log10(vmin);
  double ly1 = std::log10(vmax);
  if (ly1 - ly0 < 1e-12) {
    ly0 -= 0.5;
    ly1 += 0.5;
  } else {
    const double pad = 0.05 * (ly1 - ly0);
    ly0 -= pad;
    ly1 += pad;
  }
  const double lx0 = 0.0;  // index axis starts at 1
  const double lx1 = std::log10(static_cast<double>(std::max<std::size_t>(
      max_len, 2)));

  auto px = [&](double index) {
    return kLeft + (std::log10(index) - lx0) / (lx1 - lx0) * (kRight - kLeft);
  };
  auto py = [&](double value) {
    return kBottom -
           (std::log10(value) - ly0) / (ly1 - ly0) * (kBottom - kTop);
  };

  // Decade grid lines with labels.
  const char* grid_style =
      "stroke=\"#dddddd\" stroke-width=\"1\"";
  for (int k = static_cast<int>(std::ceil(lx0)); k <= lx1; ++k) {
    const double x = px(std::pow(10.0, k));
    line(out, x, kTop, x, kBottom, grid_style);
    text(out, x, kBottom + 16.0, fmt_value(std::pow(10.0, k)), "middle");
  }
  for (int k = static_cast<int>(std::ceil(ly0));
       k <= static_cast<int>(std::floor(ly1)); ++k) {
    const double y = py(std::pow(10.0, k));
    line(out, kLeft, y, kRight, y, grid_style);
    text(out, kLeft - 6.0, y + 4.0, fmt_value(std::pow(10.0, k)), "end");
  }
  out += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" +
         fmt(kRight - kLeft) + "\" height=\"" + fmt(kBottom - kTop) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  text(out, (kLeft + kRight) / 2.0, kHeight - 14.0, "index i", "middle");
  text(out, 16.0, (kTop + kBottom) / 2.0, "sigma_i", "middle",
       " transform=\"rotate(-90 16 " + fmt((kTop + kBottom) / 2.0) + ")\"");

  for (const RefLine& r : refs) {
    const double y = py(r.value);
    line(out, kLeft, y, kRight, y,
         ("stroke=\"" + std::string(r.color) +
          "\" stroke-width=\"1\" stroke-dasharray=\"6 4\"")
             .c_str());
    text(out, kRight + 6.0, y + 4.0,
         std::string(r.label) + " = " + format_double(r.value), "start",
         (" fill=\"" + std::string(r.color) + "\"").c_str());
  }

  double legend_y = kTop + 10.0;
  for (const Curve& c : curves) {
    std::string points;
    for (std::size_t i = 0; i < c.values->size(); ++i) {
      const double v = (*c.values)[i];
      if (v <= 0.0) continue;  // log axis: skip exact zeros
      points += fmt(px(static_cast<double>(i + 1))) + "," + fmt(py(v)) + " ";
    }
    if (!points.empty()) {
      points.pop_back();
      out += "<polyline fill=\"none\" stroke=\"" + std::string(c.color) +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }
    line(out, kRight + 6.0, legend_y, kRight + 26.0, legend_y,
         ("stroke=\"" + std::string(c.color) + "\" stroke-width=\"3\"")
             .c_str());
    text(out, kRight + 32.0, legend_y + 4.0, c.label);
    legend_y += 18.0;
  }

  out += "</svg>\n";
  write_text_file(path, out);
}

}  // namespace fanlab::cli
