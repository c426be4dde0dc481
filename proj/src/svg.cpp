#include "fe/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace fe {
namespace {

constexpr double kW = 840, kH = 520;
constexpr double kL = 64, kR = 20, kT = 36, kB = 44;  // margins

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// round a raw step to 1/2/5 * 10^k for readable ticks
double nice_step(double range, int target) {
    const double raw = range / std::max(1, target);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag * (1 + 1e-12)) return m * mag;
    return 10 * mag;
}

}  // namespace

void svg_overlay(const DensityCurve& curve, const EmpiricalSpectrum* emp,
                 const std::string& path, const std::string& title) {
    if (curve.grid.empty()) throw Error("svg_overlay: empty curve");

    double x0 = curve.grid.front(), x1 = curve.grid.back();
    double y1 = *std::max_element(curve.values.begin(), curve.values.end());
    if (emp && !emp->bin_edges.empty()) {
        x0 = std::min(x0, emp->bin_edges.front());
        x1 = std::max(x1, emp->bin_edges.back());
        for (double d : emp->density) y1 = std::max(y1, d);
    }
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= 0) y1 = 1;
    y1 *= 1.06;

    const double pw = kW - kL - kR, ph = kH - kT - kB;
    auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kT + ph - std::clamp(y / y1, 0.0, 1.0) * ph; };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("svg_overlay: cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes + ticks
    out << "<g stroke=\"#222\" stroke-width=\"1\" fill=\"none\">\n"
        << "<path d=\"M" << kL << " " << kT << " V" << kT + ph << " H" << kL + pw << "\"/>\n"
        << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">\n";
    const double sx = nice_step(x1 - x0, 8);
    for (double t = std::ceil(x0 / sx) * sx; t <= x1 + 1e-9 * sx; t += sx) {
        out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << kT + ph << "\" x2=\"" << num(px(t))
            << "\" y2=\"" << kT + ph + 5 << "\" stroke=\"#222\"/>\n"
            << "<text x=\"" << num(px(t)) << "\" y=\"" << kT + ph + 18
            << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
    }
    const double sy = nice_step(y1, 6);
    for (double v = 0; v <= y1 + 1e-9 * sy; v += sy) {
        out << "<line x1=\"" << kL - 5 << "\" y1=\"" << num(py(v)) << "\" x2=\"" << kL
            << "\" y2=\"" << num(py(v)) << "\" stroke=\"#222\"/>\n"
            << "<text x=\"" << kL - 8 << "\" y=\"" << num(py(v) + 4)
            << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
    }
    if (!title.empty())
        out << "<text x=\"" << kW / 2 << "\" y=\"" << kT - 14
            << "\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    out << "</g>\n";

    if (emp) {
        out << "<g fill=\"#9ecae1\" stroke=\"#6baed6\" stroke-width=\"0.5\">\n";
        for (size_t i = 0; i < emp->density.size(); ++i) {
            const double a = px(emp->bin_edges[i]), b = px(emp->bin_edges[i + 1]);
            const double top = py(emp->density[i]);
            out << "<rect x=\"" << num(a) << "\" y=\"" << num(top) << "\" width=\""
                << num(std::max(0.0, b - a)) << "\" height=\"" << num(kT + ph - top)
                << "\"/>\n";
        }
        out << "</g>\n";
    }

    out << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.6\" points=\"";
    for (size_t i = 0; i < curve.grid.size(); ++i)
        out << num(px(curve.grid[i])) << "," << num(py(curve.values[i])) << " ";
    out << "\"/>\n</svg>\n";
    if (!out) throw Error("svg_overlay: write failed for " + path);
}

}  // namespace fe
