#include "svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace coexsim::cli::svg {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 190.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
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

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + step * 1e-9; t += step)
    out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  return out;
}

std::string fmt_tick(double v) { return fmt::format("{:.4g}", v); }

class Canvas {
 public:
  Canvas(const PlotSpec& spec, double x0, double x1, double y0, double y1)
      : spec_(spec), x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    out_ += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n",
        kWidth, kHeight);
    out_ += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
    out_ += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                        kLeft + plot_w() / 2, escape(spec.title));
  }

  double plot_w() const { return kWidth - kLeft - kRight; }
  double plot_h() const { return kHeight - kTop - kBottom; }
  double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * plot_w(); }
  double py(double y) const {
    const double f = spec_.log_y ? (std::log10(y) - std::log10(y0_)) / (std::log10(y1_) - std::log10(y0_))
                                 : (y - y0_) / (y1_ - y0_);
    return kTop + (1.0 - f) * plot_h();
  }

  void axes(const std::vector<double>& xticks, const std::vector<std::string>& xlabels) {
    std::vector<double> yt;
    if (spec_.log_y) {
      for (double e = std::ceil(std::log10(y0_) - 1e-9); e <= std::log10(y1_) + 1e-9; e += 1.0)
        yt.push_back(std::pow(10.0, e));
    } else {
      yt = nice_ticks(y0_, y1_);
    }
    for (double t : yt) {
      out_ += fmt::format("<line x1=\"{:.1f}\" x2=\"{:.1f}\" y1=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n",
                          kLeft, kLeft + plot_w(), py(t), py(t));
      out_ += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6,
                          py(t) + 4, spec_.log_y ? fmt::format("1e{}", std::lround(std::log10(t))) : fmt_tick(t));
    }
    for (std::size_t i = 0; i < xticks.size(); ++i) {
      const double x = px(xticks[i]);
      out_ += fmt::format("<line x1=\"{0:.1f}\" x2=\"{0:.1f}\" y1=\"{1:.1f}\" y2=\"{2:.1f}\" stroke=\"#000\"/>\n",
                          x, kTop + plot_h(), kTop + plot_h() + 5);
      out_ += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", x,
                          kTop + plot_h() + 18, escape(xlabels[i]));
    }
    out_ += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000\"/>\n",
                        kLeft, kTop, plot_w(), plot_h());
    out_ += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                        kLeft + plot_w() / 2, kHeight - 18, escape(spec_.x_label));
    out_ += fmt::format(
        "<text x=\"18\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.1f})\">{1}</text>\n",
        kTop + plot_h() / 2, escape(spec_.y_label));
  }

  void legend(const std::vector<std::string>& names, const std::vector<bool>& dashed) {
    const double x = kWidth - kRight + 14;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const double y = kTop + 10 + 18.0 * static_cast<double>(i);
      out_ += fmt::format(
          "<line x1=\"{:.1f}\" x2=\"{:.1f}\" y1=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" stroke-width=\"3\"{}/>\n", x,
          x + 22, y, y, kPalette[i % kPalette.size()], dashed[i] ? " stroke-dasharray=\"5,3\"" : "");
      out_ += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", x + 28, y + 4, escape(names[i]));
    }
  }

  std::string& body() { return out_; }
  std::string finish() { return out_ + "</svg>\n"; }

 private:
  PlotSpec spec_;
  double x0_, x1_, y0_, y1_;
  std::string out_;
};

}  // namespace

std::string line_plot(const PlotSpec& spec, const std::vector<Series>& series) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (spec.log_y && s.y[i] <= 0.0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x1 = x0 + 1.0;
  if (!std::isnan(spec.y_min)) y0 = spec.y_min;
  if (!std::isnan(spec.y_max)) y1 = spec.y_max;
  if (spec.log_y) {
    y0 = std::pow(10.0, std::floor(std::log10(y0)));
    y1 = std::pow(10.0, std::ceil(std::log10(y1)));
  }
  if (y1 <= y0) y1 = y0 + 1.0;

  Canvas c(spec, x0, x1, y0, y1);
  const auto xt = nice_ticks(x0, x1);
  std::vector<std::string> xl;
  for (double t : xt) xl.push_back(fmt_tick(t));
  c.axes(xt, xl);

  std::vector<std::string> names;
  std::vector<bool> dashed;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double y = s.y[i];
      if (!std::isfinite(s.x[i]) || !std::isfinite(y) || (spec.log_y && y <= 0.0)) continue;
      y = std::clamp(y, y0, y1);
      pts += fmt::format("{:.1f},{:.1f} ", c.px(s.x[i]), c.py(y));
    }
    c.body() += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{} points=\"{}\"/>\n",
                            kPalette[k % kPalette.size()], s.dashed ? " stroke-dasharray=\"5,3\"" : "", pts);
    names.push_back(s.name);
    dashed.push_back(s.dashed);
  }
  c.legend(names, dashed);
  return c.finish();
}

std::string bar_plot(const PlotSpec& spec, const std::vector<std::string>& series_names,
                     const std::vector<BarGroup>& groups) {
  double y1 = 0.0;
  for (const auto& g : groups)
    for (double v : g.values)
      if (std::isfinite(v)) y1 = std::max(y1, v);
  if (!std::isnan(spec.y_max)) y1 = spec.y_max;
  if (y1 <= 0.0) y1 = 1.0;
  const double n = static_cast<double>(std::max<std::size_t>(groups.size(), 1));
  Canvas c(spec, 0.0, n, 0.0, y1 * 1.05);
  std::vector<double> xt;
  std::vector<std::string> xl;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    xt.push_back(static_cast<double>(g) + 0.5);
    xl.push_back(groups[g].label);
  }
  c.axes(xt, xl);
  const double ns = static_cast<double>(std::max<std::size_t>(series_names.size(), 1));
  const double bar = 0.8 / ns;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t k = 0; k < groups[g].values.size(); ++k) {
      const double v = groups[g].values[k];
      if (!std::isfinite(v)) continue;
      const double xa = c.px(static_cast<double>(g) + 0.1 + bar * static_cast<double>(k));
      const double xb = c.px(static_cast<double>(g) + 0.1 + bar * static_cast<double>(k + 1));
      c.body() += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"/>\n",
                              xa, c.py(v), xb - xa, c.py(0.0) - c.py(v), kPalette[k % kPalette.size()]);
    }
  }
  c.legend(series_names, std::vector<bool>(series_names.size(), false));
  return c.finish();
}

}  // namespace coexsim::cli::svg
