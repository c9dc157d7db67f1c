#include "therapycert/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace therapycert::svg {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 440;
constexpr double kLeft = 80;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

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

class Scale {
public:
    Scale(double lo, double hi, bool log, double p0, double p1)
        : log_(log), p0_(p0), p1_(p1) {
        lo_ = map(lo);
        hi_ = map(hi);
        if (!(hi_ > lo_)) {
            lo_ -= 0.5;
            hi_ += 0.5;
        }
    }

    double operator()(double v) const { return p0_ + (map(v) - lo_) / (hi_ - lo_) * (p1_ - p0_); }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log_) {
            for (double e = std::ceil(lo_); e <= std::floor(hi_) + 1e-9; e += 1.0) {
                out.push_back(std::pow(10.0, e));
            }
        } else {
            for (int i = 0; i <= 4; ++i) out.push_back(lo_ + (hi_ - lo_) * i / 4.0);
        }
        return out;
    }

private:
    double map(double v) const { return log_ ? std::log10(v) : v; }

    bool log_;
    double p0_;
    double p1_;
    double lo_ = 0.0;
    double hi_ = 1.0;
};

std::string tick_label(double v, bool log) {
    if (log) return fmt::format("1e{}", static_cast<int>(std::lround(std::log10(v))));
    return fmt::format("{:.3g}", v);
}

std::string frame(const Axes& axes, const Scale& sx, const Scale& sy) {
    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        kWidth, kHeight);
    out += fmt::format("<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       kWidth / 2, escape(axes.title));
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
                       "stroke=\"black\"/>\n",
                       kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom);
    for (double t : sx.ticks()) {
        const double x = sx(t);
        out += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1}\" x2=\"{0:.1f}\" y2=\"{2}\" stroke=\"black\"/>"
                           "<text x=\"{0:.1f}\" y=\"{3}\" text-anchor=\"middle\">{4}</text>\n",
                           x, kHeight - kBottom, kHeight - kBottom + 5, kHeight - kBottom + 18,
                           tick_label(t, axes.log_x));
    }
    for (double t : sy.ticks()) {
        const double y = sy(t);
        out += fmt::format("<line x1=\"{0}\" y1=\"{1:.1f}\" x2=\"{2}\" y2=\"{1:.1f}\" stroke=\"black\"/>"
                           "<text x=\"{3}\" y=\"{1:.1f}\" text-anchor=\"end\" "
                           "dominant-baseline=\"middle\">{4}</text>\n",
                           kLeft - 5, y, kLeft, kLeft - 8, tick_label(t, axes.log_y));
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                       kLeft + (kWidth - kLeft - kRight) / 2, kHeight - 15, escape(axes.x_label));
    out += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" "
                       "transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                       kTop + (kHeight - kTop - kBottom) / 2, escape(axes.y_label));
    return out;
}

std::pair<double, double> extent(const std::vector<double>& v, bool log) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double x : v) {
        if (!std::isfinite(x) || (log && x <= 0.0)) continue;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (!std::isfinite(lo)) return {log ? 1.0 : 0.0, log ? 10.0 : 1.0};
    return {lo, hi};
}

} // namespace

std::string line_plot(const Axes& axes, const std::vector<Series>& series) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& s : series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
    }
    const auto [x0, x1] = extent(xs, axes.log_x);
    auto [y0, y1] = extent(ys, axes.log_y);
    if (!axes.log_y) {
        y0 = std::min(y0, 0.0);
        if (y1 <= y0) y1 = y0 + 1.0;
    }
    const Scale sx(x0, x1, axes.log_x, kLeft, kWidth - kRight);
    const Scale sy(y0, y1, axes.log_y, kHeight - kBottom, kTop);
    std::string out = frame(axes, sx, sy);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            pts += fmt::format("{:.1f},{:.1f} ", sx(s.x[i]), sy(s.y[i]));
        }
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                           color, pts);
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            out += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"2.5\" fill=\"{}\"/>\n",
                               sx(s.x[i]), sy(s.y[i]), color);
        }
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\" fill=\"{}\">{}</text>\n",
                           kWidth - kRight - 8, kTop + 16 + 16 * static_cast<double>(k), color,
                           escape(s.name));
    }
    return out + "</svg>\n";
}

std::string region_map(const Axes& axes, const std::vector<Cell>& cells) {
    std::set<double> ux;
    std::set<double> uy;
    for (const auto& c : cells) {
        ux.insert(c.x);
        uy.insert(c.y);
    }
    std::vector<double> xs(ux.begin(), ux.end());
    std::vector<double> ys(uy.begin(), uy.end());
    const auto [x0, x1] = extent(xs, axes.log_x);
    const auto [y0, y1] = extent(ys, axes.log_y);
    const Scale sx(x0, x1, axes.log_x, kLeft + 10, kWidth - kRight - 10);
    const Scale sy(y0, y1, axes.log_y, kHeight - kBottom - 10, kTop + 10);
    std::string out = frame(axes, sx, sy);
    const double w = (kWidth - kLeft - kRight - 20) / std::max<double>(1.0, static_cast<double>(xs.size()));
    const double h = (kHeight - kTop - kBottom - 20) / std::max<double>(1.0, static_cast<double>(ys.size()));
    for (const auto& c : cells) {
        out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" "
                           "fill=\"{}\" opacity=\"0.8\"/>\n",
                           sx(c.x) - w / 2, sy(c.y) - h / 2, w, h, c.on ? "#2ca02c" : "#d62728");
    }
    return out + "</svg>\n";
}

} // namespace therapycert::svg
