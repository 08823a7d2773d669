#include "drclab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <stdexcept>

namespace drclab::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

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

std::string escape_text(const std::string& s) {
    std::string out;
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

struct LogAxis {
    double lo = 0.0, hi = 1.0;  // log10 range, padded

    double place(double value, double px_lo, double px_hi) const {
        const double f = (std::log10(value) - lo) / (hi - lo);
        return px_lo + f * (px_hi - px_lo);
    }
};

LogAxis fit_axis(double min_value, double max_value) {
    LogAxis axis;
    axis.lo = std::log10(min_value);
    axis.hi = std::log10(max_value);
    if (axis.hi - axis.lo < 1e-12) {
        axis.lo -= 0.5;
        axis.hi += 0.5;
    } else {
        const double pad = 0.04 * (axis.hi - axis.lo);
        axis.lo -= pad;
        axis.hi += pad;
    }
    return axis;
}

/// Data-point positions when few distinct values (a geometric horizon
/// sweep), powers of ten otherwise.
std::vector<double> axis_ticks(const std::set<double>& values, const LogAxis& axis) {
    if (values.size() <= 9) return {values.begin(), values.end()};
    std::vector<double> ticks;
    for (int p = static_cast<int>(std::ceil(axis.lo)); p <= static_cast<int>(std::floor(axis.hi));
         ++p)
        ticks.push_back(std::pow(10.0, p));
    if (ticks.empty()) ticks = {*values.begin(), *values.rbegin()};
    return ticks;
}

}  // namespace

std::string render_loglog(const PlotSpec& spec, const std::vector<Series>& series) {
    if (series.empty()) throw std::invalid_argument("svg plot: no series");
    std::set<double> xs, ys;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("svg plot: series '" + s.label + "' is ragged");
        if (s.x.empty())
            throw std::invalid_argument("svg plot: series '" + s.label + "' is empty");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.x[i]) ||
                !std::isfinite(s.y[i]))
                throw std::invalid_argument("svg plot: series '" + s.label +
                                            "' has nonpositive or nonfinite data");
            xs.insert(s.x[i]);
            ys.insert(s.y[i]);
        }
    }

    const double ml = 70, mr = 20, mt = 42, mb = 56;
    const double x0 = ml, x1 = spec.width - mr;
    const double y0 = mt, y1 = spec.height - mb;
    const LogAxis ax = fit_axis(*xs.begin(), *xs.rbegin());
    const LogAxis ay = fit_axis(*ys.begin(), *ys.rbegin());

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(spec.width) + "\" height=\"" + std::to_string(spec.height) +
           "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " + std::to_string(spec.height) +
           "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
           std::to_string(spec.height) + "\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"24\" font-family=\"sans-serif\" " +
           "font-size=\"15\" text-anchor=\"middle\">" + escape_text(spec.title) + "</text>\n";

    for (double tx : axis_ticks(xs, ax)) {
        const double px = ax.place(tx, x0, x1);
        out += "<line x1=\"" + num(px) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(px) +
               "\" y2=\"" + num(y1) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + num(px) + "\" y=\"" + num(y1 + 18) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
               tick_label(tx) + "</text>\n";
    }
    for (double ty : axis_ticks(ys, ay)) {
        const double py = ay.place(ty, y1, y0);
        out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(py) + "\" x2=\"" + num(x1) +
               "\" y2=\"" + num(py) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(py + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" +
               tick_label(ty) + "</text>\n";
    }

    out += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(x1 - x0) +
           "\" height=\"" + num(y1 - y0) + "\" fill=\"none\" stroke=\"#444444\"/>\n";
    out += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(y1 + 40) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" +
           escape_text(spec.x_label) + "</text>\n";
    out += "<text x=\"18\" y=\"" + num((y0 + y1) / 2) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" " +
           "transform=\"rotate(-90 18 " + num((y0 + y1) / 2) + ")\">" +
           escape_text(spec.y_label) + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const std::string color = s.color.empty() ? kPalette[k % kPaletteSize] : s.color;
        std::string points;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i) points += ' ';
            points += num(ax.place(s.x[i], x0, x1)) + "," + num(ay.place(s.y[i], y1, y0));
        }
        out += "<polyline fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.8\" points=\"" + points + "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out += "<circle cx=\"" + num(ax.place(s.x[i], x0, x1)) + "\" cy=\"" +
                   num(ay.place(s.y[i], y1, y0)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const std::string color = s.color.empty() ? kPalette[k % kPaletteSize] : s.color;
        const double ly = y0 + 16 + 17 * static_cast<double>(k);
        out += "<line x1=\"" + num(x0 + 10) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
               num(x0 + 34) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color +
               "\" stroke-width=\"1.8\"/>\n";
        out += "<text x=\"" + num(x0 + 40) + "\" y=\"" + num(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape_text(s.label) +
               "</text>\n";
    }

    out += "</svg>\n";
    return out;
}

}  // namespace drclab::svg
