#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fe/density.hpp"

namespace fe {

namespace {

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
    double acc = 0.0;
    for (size_t i = 0; i + 1 < t.size(); ++i)
        acc += 0.5 * (f[i] + f[i + 1]) * (t[i + 1] - t[i]);
    return acc;
}

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

void GridSpec::validate() const {
    if (!(t_min < t_max)) throw Error("grid: t_min must be < t_max");
    if (points < 2) throw Error("grid: points must be >= 2");
    if (!(epsilon > 0.0)) throw Error("grid: epsilon must be > 0");
}

DensityCurve density_grid(const OperatorModel& x, const OperatorModel& y,
                          const GridSpec& spec, const IterationConfig& cfg,
                          bool skip_bad_points) {
    spec.validate();
    ProductCauchyEvaluator ev(x, y, cfg);

    DensityCurve curve;
    curve.epsilon = spec.epsilon;
    curve.grid.reserve(spec.points);
    curve.values.reserve(spec.points);
    const double dt = (spec.t_max - spec.t_min) / (spec.points - 1);
    std::vector<int> iters;
    iters.reserve(spec.points);

    for (int i = 0; i < spec.points; ++i) {
        const double t = spec.t_min + i * dt;
        curve.grid.push_back(t);
        double v = 0.0;
        try {
            const Matrix g = ev.at(cplx(t, spec.epsilon), spec.warm_sweep);
            v = -normalized_trace(g).imag() / std::numbers::pi;
            iters.push_back(ev.last_iterations());
        } catch (const Error& e) {
            if (!skip_bad_points)
                throw Error("density_grid failed at t = " + fmt12(t) + ": " + e.what());
            curve.failed_points.push_back(t);
        }
        if (v < 0.0) {
            ++curve.clip_count;
            v = 0.0;
        }
        curve.values.push_back(v);
    }

    curve.total_mass = trapezoid(curve.grid, curve.values);
    curve.moments = curve_moments(curve);
    if (!iters.empty()) {
        std::sort(iters.begin(), iters.end());
        curve.iter_min = iters.front();
        curve.iter_median = iters[iters.size() / 2];
        curve.iter_max = iters.back();
    }
    return curve;
}

DensityCurve unwrap_embedding(const DensityCurve& curve, int k) {
    if (k < 1) throw Error("unwrap_embedding: k must be >= 1");
    if (k == 1) return curve;
    DensityCurve out = curve;
    for (auto& v : out.values) v *= k;
    out.total_mass = curve.total_mass * k;
    if (out.total_mass > 1.0 + 2e-2) {
        throw UnwrapInconsistent("unwrap_embedding: mass " + fmt12(out.total_mass) +
                                 " after unwrap by k = " + std::to_string(k) +
                                 " (grid too coarse for this curve; raise grid.points)");
    }
    out.atom_at_zero = std::max(0.0, 1.0 - out.total_mass);
    out.moments = curve_moments(out);
    return out;
}

Moments curve_moments(const DensityCurve& curve) {
    const auto& t = curve.grid;
    const auto& f = curve.values;
    std::vector<double> tf(t.size()), ttf(t.size());
    for (size_t i = 0; i < t.size(); ++i) {
        tf[i] = t[i] * f[i];
        ttf[i] = t[i] * tf[i];
    }
    Moments m;
    m.m0 = trapezoid(t, f);
    m.m1 = trapezoid(t, tf);
    m.m2 = trapezoid(t, ttf);
    if (curve.atom_at_zero) m.m0 += *curve.atom_at_zero;  // t = 0: no m1/m2 part
    return m;
}

void csv_export(const DensityCurve& curve, const std::string& path,
                const std::vector<std::pair<std::string, std::string>>& extra_meta) {
    {
        std::ofstream out(path);
        if (!out) throw Error("csv_export: cannot open " + path);
        out << "t,density\n";
        for (size_t i = 0; i < curve.grid.size(); ++i)
            out << fmt12(curve.grid[i]) << ',' << fmt12(curve.values[i]) << '\n';
        if (!out) throw Error("csv_export: write failed for " + path);
    }
    const std::string meta_path = path + ".meta";
    std::ofstream meta(meta_path);
    if (!meta) throw Error("csv_export: cannot open " + meta_path);
    for (const auto& [k, v] : extra_meta) meta << k << '=' << v << '\n';
    meta << "epsilon=" << fmt12(curve.epsilon) << '\n';
    meta << "mass=" << fmt12(curve.total_mass) << '\n';
    meta << "atom_at_zero=" << (curve.atom_at_zero ? fmt12(*curve.atom_at_zero) : "none")
         << '\n';
    meta << "m1=" << fmt12(curve.moments.m1) << '\n';
    meta << "m2=" << fmt12(curve.moments.m2) << '\n';
    meta << "clip_count=" << curve.clip_count << '\n';
    meta << "iterations_min=" << curve.iter_min << '\n';
    meta << "iterations_median=" << curve.iter_median << '\n';
    meta << "iterations_max=" << curve.iter_max << '\n';
    meta << "failed_points=" << curve.failed_points.size() << '\n';
    if (!meta) throw Error("csv_export: write failed for " + meta_path);
}

}  // namespace fe
