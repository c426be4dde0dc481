#pragma once
// Stieltjes inversion on a grid: f(t) = -Im tr G_{xy}((t+i eps)I)/pi, plus the
// block-embedding unwrap, moments and CSV export.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fe/subordination.hpp"

namespace fe {

struct UnwrapInconsistent : Error {
    using Error::Error;
};

struct GridSpec {
    double t_min = 0.0;
    double t_max = 1.0;
    int points = 2;
    double epsilon = 1e-4;
    bool warm_sweep = true;  // seed each point with the previous omega2

    void validate() const;  // throws Error on out-of-range fields
};

struct Moments {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
};

struct DensityCurve {
    std::vector<double> grid;    // ascending, uniform spacing
    std::vector<double> values;  // density per unit t, >= 0 after clipping
    double epsilon = 0.0;
    double total_mass = 0.0;  // trapezoid quadrature of values
    std::optional<double> atom_at_zero;
    Moments moments;  // quadrature + atom contribution
    int clip_count = 0;
    int iter_min = 0, iter_median = 0, iter_max = 0;
    std::vector<double> failed_points;  // t values skipped (skip_bad_points)
};

// Evaluate the density on the grid. Points sweep left to right; with
// spec.warm_sweep each point reuses the previous omega2 as the start. A point
// failure aborts with the failing t in the message unless skip_bad_points, in
// which case the value is recorded as 0 and the t collected in failed_points.
DensityCurve density_grid(const OperatorModel& x, const OperatorModel& y,
                          const GridSpec& spec, const IterationConfig& cfg = {},
                          bool skip_bad_points = false);

// Undo a k-block corner embedding whose law is (1/k) target + (1-1/k) delta_0:
// multiply the curve by k and book the structural atom at zero. k = 1 is the
// identity.
DensityCurve unwrap_embedding(const DensityCurve& curve, int k);

Moments curve_moments(const DensityCurve& curve);

// Write `t,density` CSV (12 significant digits) plus a `.meta` sidecar of
// key=value lines; extra_meta entries are written first, in the given order.
void csv_export(const DensityCurve& curve, const std::string& path,
                const std::vector<std::pair<std::string, std::string>>& extra_meta = {});

}  // namespace fe
