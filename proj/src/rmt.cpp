#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <complex>
#define lapack_complex_double std::complex<double>
#define lapack_complex_float std::complex<float>
#include <cblas.h>
#include <lapacke.h>

#include "fe/rmt.hpp"

extern "C" void openblas_set_num_threads(int);

namespace fe {

namespace {

void single_thread_blas() {
    static const bool done = [] {
        openblas_set_num_threads(1);
        return true;
    }();
    (void)done;
}

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// column-major dense block, LAPACK layout
struct CMat {
    int n = 0;
    std::vector<cplx> a;
    explicit CMat(int dim) : n(dim), a(static_cast<size_t>(dim) * dim) {}
    cplx& at(int i, int j) { return a[static_cast<size_t>(j) * n + i]; }
    const cplx& at(int i, int j) const { return a[static_cast<size_t>(j) * n + i]; }
};

Matrix to_matrix(const CMat& c) {
    Matrix m(c.n);
    for (int j = 0; j < c.n; ++j)
        for (int i = 0; i < c.n; ++i) m(i, j) = c.at(i, j);
    return m;
}

void check_info(lapack_int info, const char* who) {
    if (info != 0)
        throw Error(std::string(who) + " failed (info=" + std::to_string(info) + ")");
}

const cplx kOne(1.0, 0.0), kZero(0.0, 0.0);

void zgemm_cm(CBLAS_TRANSPOSE ta, CBLAS_TRANSPOSE tb, const CMat& a, const CMat& b,
              CMat& c) {
    cblas_zgemm(CblasColMajor, ta, tb, a.n, a.n, a.n, &kOne, a.a.data(), a.n,
                b.a.data(), b.n, &kZero, c.a.data(), c.n);
}

CMat haar_cm(int N, Rng& rng) {
    CMat q(N);
    const double inv = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const double re = rng.normal(), im = rng.normal();
            q.at(i, j) = cplx(re * inv, im * inv);
        }
    std::vector<cplx> tau(N);
    check_info(LAPACKE_zgeqrf(LAPACK_COL_MAJOR, N, N, q.a.data(), N, tau.data()),
               "zgeqrf");
    std::vector<cplx> phase(N);
    for (int i = 0; i < N; ++i) {
        const cplx r = q.at(i, i);
        const double m = std::abs(r);
        phase[i] = m > 0.0 ? r / m : cplx(1.0, 0.0);
    }
    check_info(LAPACKE_zungqr(LAPACK_COL_MAJOR, N, N, N, q.a.data(), N, tau.data()),
               "zungqr");
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) q.at(i, j) *= phase[j];
    return q;
}

// floor(p_i N) slots per atom, remaining slots to the largest weights
std::vector<int> proportional_fill(const std::vector<DiscreteModel::Atom>& atoms,
                                   int N) {
    const int na = static_cast<int>(atoms.size());
    std::vector<int> count(na);
    int used = 0;
    for (int i = 0; i < na; ++i) {
        count[i] = static_cast<int>(std::floor(atoms[i].weight * N));
        used += count[i];
    }
    std::vector<int> order(na);
    for (int i = 0; i < na; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
        return atoms[l].weight > atoms[r].weight;
    });
    for (int r = 0; r < N - used; ++r) ++count[order[r % na]];
    std::vector<int> slot;
    slot.reserve(N);
    for (int i = 0; i < na; ++i) slot.insert(slot.end(), count[i], i);
    return slot;
}

CMat realize_cm(const OperatorModel& model, int N, Rng& rng, bool haar_conjugate) {
    const int n = model_dim(model);
    const int nn = n * N;
    CMat x(nn);

    if (const auto* d = std::get_if<DiscreteModel>(&model)) {
        const std::vector<int> slot = proportional_fill(d->atoms, N);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int j = 0; j < N; ++j)
                    x.at(a * N + j, b * N + j) = d->atoms[slot[j]].m(a, b);
        if (haar_conjugate) {
            const CMat u = haar_cm(N, rng);
            CMat t(N), c(N);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    // block (a,b) is diagonal: conjugate as U^H diag U
                    for (int j = 0; j < N; ++j) {
                        const cplx dj = x.at(a * N + j, b * N + j);
                        for (int i = 0; i < N; ++i) t.at(j, i) = dj * u.at(j, i);
                    }
                    // t = diag * U (rows scaled); c = U^H t
                    cblas_zgemm(CblasColMajor, CblasConjTrans, CblasNoTrans, N, N, N,
                                &kOne, u.a.data(), N, t.a.data(), N, &kZero,
                                c.a.data(), N);
                    for (int j = 0; j < N; ++j)
                        for (int i = 0; i < N; ++i) x.at(a * N + i, b * N + j) = c.at(i, j);
                }
        }
        return x;
    }

    const auto& s = std::get<SemicircularModel>(model);
    for (const auto& ak : s.covariance.family) {
        const Matrix w = sample_wigner(N, rng);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const cplx coef = ak(a, b);
                if (coef == kZero) continue;
                for (int j = 0; j < N; ++j)
                    for (int i = 0; i < N; ++i)
                        x.at(a * N + i, b * N + j) += coef * w(i, j);
            }
    }
    if (s.shift != 0.0)
        for (int i = 0; i < nn; ++i) x.at(i, i) += s.shift;
    return x;
}

// eigenvalues of the Hermitian positive representative of X·Y:
//   X = L L*          -> spec(L* Y L)            (fast path)
//   X = U diag(l) U*  -> spec(sqrt(X) Y sqrt(X)) (PSD-projected fallback)
std::vector<double> product_eigs(const CMat& x, const CMat& y, int trial) {
    const int nn = x.n;
    std::vector<double> w(nn);

    CMat chol = x;
    const lapack_int info =
        LAPACKE_zpotrf(LAPACK_COL_MAJOR, 'L', nn, chol.a.data(), nn);
    if (info == 0) {
        // zhegst(2,'L') forms L* Y L in place at half the cost of two trmms
        CMat b = y;
        check_info(LAPACKE_zhegst(LAPACK_COL_MAJOR, 2, 'L', nn, b.a.data(), nn,
                                  chol.a.data(), nn),
                   "zhegst");
        check_info(LAPACKE_zheev(LAPACK_COL_MAJOR, 'N', 'L', nn, b.a.data(), nn,
                                 w.data()),
                   "zheev");
        return w;
    }
    if (info < 0) check_info(info, "zpotrf");

    // not strictly positive definite: eigendecompose and project tiny
    // finite-size edge leakage (scale ~ ‖X‖ (nN)^{-2/3}) onto the PSD cone
    CMat u = x;
    check_info(LAPACKE_zheev(LAPACK_COL_MAJOR, 'V', 'L', nn, u.a.data(), nn, w.data()),
               "zheev");
    const double lam_max = std::max(std::fabs(w.front()), std::fabs(w.back()));
    const double edge_tol = 3.0 * lam_max * std::pow(double(nn), -2.0 / 3.0);
    if (w.front() < -edge_tol) {
        throw NonPositiveRealization("x realization not positive semidefinite: trial " +
                                     std::to_string(trial) + ", min eigenvalue " +
                                     fmt12(w.front()));
    }
    CMat t(nn), sx(nn), p(nn);
    for (int j = 0; j < nn; ++j) {
        const double s = std::sqrt(std::max(w[j], 0.0));
        for (int i = 0; i < nn; ++i) t.at(i, j) = u.at(i, j) * s;
    }
    zgemm_cm(CblasNoTrans, CblasConjTrans, t, u, sx);  // sqrt(X)
    zgemm_cm(CblasNoTrans, CblasNoTrans, sx, y, t);
    zgemm_cm(CblasNoTrans, CblasNoTrans, t, sx, p);
    check_info(LAPACKE_zheev(LAPACK_COL_MAJOR, 'N', 'L', nn, p.a.data(), nn, w.data()),
               "zheev");
    return w;
}

}  // namespace

double Rng::uniform() {
    return static_cast<double>(g_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

void SimulationSpec::validate() const {
    if (matrix_size < 2) throw Error("simulation: matrix_size must be >= 2");
    if (trials < 1) throw Error("simulation: trials must be >= 1");
    if (bins < 10) throw Error("simulation: bins must be >= 10");
    if (unwrap_k < 1) throw Error("simulation: unwrap_k must be >= 1");
    if (model_dim(x_model) != model_dim(y_model))
        throw Error("simulation: model dimensions disagree");
}

Matrix sample_wigner(int N, Rng& rng) {
    if (N < 2) throw Error("sample_wigner: N must be >= 2");
    Matrix w(N);
    const double d = 1.0 / std::sqrt(double(N));
    const double o = 1.0 / std::sqrt(2.0 * N);
    for (int i = 0; i < N; ++i) {
        w(i, i) = rng.normal() * d;
        for (int j = i + 1; j < N; ++j) {
            const cplx z(rng.normal() * o, rng.normal() * o);
            w(i, j) = z;
            w(j, i) = std::conj(z);
        }
    }
    return w;
}

Matrix sample_haar_unitary(int N, Rng& rng) {
    if (N < 1) throw Error("sample_haar_unitary: N must be >= 1");
    single_thread_blas();
    return to_matrix(haar_cm(N, rng));
}

Matrix realize_model(const OperatorModel& model, int N, Rng& rng,
                     bool haar_conjugate) {
    if (N < 2) throw Error("realize_model: N must be >= 2");
    single_thread_blas();
    return to_matrix(realize_cm(model, N, rng, haar_conjugate));
}

EmpiricalSpectrum product_spectrum(const SimulationSpec& spec) {
    spec.validate();
    single_thread_blas();
    const int N = spec.matrix_size;
    const int nn = model_dim(spec.x_model) * N;
    const bool both_discrete =
        is_discrete(spec.x_model) && is_discrete(spec.y_model);
    int keep = nn;
    if (spec.unwrap_k > 1) {
        if (nn % spec.unwrap_k != 0)
            throw Error("product_spectrum: unwrap_k must divide the realization size");
        keep = nn / spec.unwrap_k;
    }

    EmpiricalSpectrum emp;
    emp.eigenvalues.reserve(static_cast<size_t>(keep) * spec.trials);
    for (int t = 0; t < spec.trials; ++t) {
        Rng rng(spec.seed ^ static_cast<std::uint64_t>(t));
        const CMat x = realize_cm(spec.x_model, N, rng, both_discrete);
        const CMat y = realize_cm(spec.y_model, N, rng, false);
        std::vector<double> eig = product_eigs(x, y, t);
        if (keep < nn) {
            std::sort(eig.begin(), eig.end(), [](double l, double r) {
                const double fl = std::fabs(l), fr = std::fabs(r);
                return fl != fr ? fl < fr : l < r;
            });
            eig.erase(eig.begin(), eig.begin() + (nn - keep));
            std::sort(eig.begin(), eig.end());
        }
        emp.eigenvalues.insert(emp.eigenvalues.end(), eig.begin(), eig.end());
    }

    double lo = *std::min_element(emp.eigenvalues.begin(), emp.eigenvalues.end());
    double hi = *std::max_element(emp.eigenvalues.begin(), emp.eigenvalues.end());
    if (hi - lo < 1e-9) {
        lo -= 0.5;
        hi += 0.5;
    }
    const int bins = spec.bins;
    emp.bin_edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i)
        emp.bin_edges[i] = lo + (hi - lo) * (double(i) / bins);
    emp.bin_edges.back() = hi;
    std::vector<std::int64_t> count(bins, 0);
    for (const double v : emp.eigenvalues) {
        int idx = static_cast<int>((v - lo) / (hi - lo) * bins);
        idx = std::clamp(idx, 0, bins - 1);
        ++count[idx];
    }
    emp.density.resize(bins);
    const double total = static_cast<double>(emp.eigenvalues.size());
    for (int i = 0; i < bins; ++i)
        emp.density[i] = count[i] / (total * (emp.bin_edges[i + 1] - emp.bin_edges[i]));
    return emp;
}

double l1_distance(const DensityCurve& curve, const EmpiricalSpectrum& emp) {
    if (emp.density.empty() || emp.eigenvalues.empty())
        throw Error("l1_distance: empty histogram");
    if (curve.grid.size() < 2) throw Error("l1_distance: curve too short");

    const auto& g = curve.grid;
    const auto& v = curve.values;
    auto value_at = [&](double t) {
        const size_t j = std::upper_bound(g.begin(), g.end(), t) - g.begin();
        if (j == 0) return v.front();
        if (j >= g.size()) return v.back();
        const double s = (t - g[j - 1]) / (g[j] - g[j - 1]);
        return (1.0 - s) * v[j - 1] + s * v[j];
    };
    // exact trapezoid mass of the piecewise-linear curve over [a, b]
    auto curve_mass = [&](double a, double b) {
        a = std::max(a, g.front());
        b = std::min(b, g.back());
        if (b <= a) return 0.0;
        double m = 0.0, t0 = a, f0 = value_at(a);
        size_t j = std::upper_bound(g.begin(), g.end(), a) - g.begin();
        for (; j < g.size() && g[j] < b; ++j) {
            m += 0.5 * (f0 + v[j]) * (g[j] - t0);
            t0 = g[j];
            f0 = v[j];
        }
        return m + 0.5 * (f0 + value_at(b)) * (b - t0);
    };

    const auto& e = emp.bin_edges;
    double acc = curve_mass(g.front(), e.front()) + curve_mass(e.back(), g.back());
    for (size_t i = 0; i + 1 < e.size(); ++i)
        acc += std::fabs(curve_mass(e[i], e[i + 1]) - emp.density[i] * (e[i + 1] - e[i]));
    return acc;
}

std::pair<double, double> suggested_grid_bounds(const EmpiricalSpectrum& emp) {
    if (emp.eigenvalues.empty()) throw Error("suggested_grid_bounds: empty spectrum");
    const auto [lo, hi] =
        std::minmax_element(emp.eigenvalues.begin(), emp.eigenvalues.end());
    return {*lo - 0.5, *hi + 0.5};
}

void eigenvalues_csv(const EmpiricalSpectrum& emp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("eigenvalues_csv: cannot open " + path);
    out << "eigenvalue\n";
    for (const double v : emp.eigenvalues) out << fmt12(v) << '\n';
    if (!out) throw Error("eigenvalues_csv: write failed for " + path);
}

std::vector<double> dense_eigenvalues(const Matrix& h) {
    single_thread_blas();
    const int n = h.dim();
    CMat a(n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) a.at(i, j) = h(i, j);
    std::vector<double> w(n);
    check_info(LAPACKE_zheev(LAPACK_COL_MAJOR, 'N', 'L', n, a.a.data(), n, w.data()),
               "zheev");
    return w;
}

void histogram_csv(const EmpiricalSpectrum& emp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("histogram_csv: cannot open " + path);
    out << "bin_left,bin_right,density\n";
    for (size_t i = 0; i < emp.density.size(); ++i)
        out << fmt12(emp.bin_edges[i]) << ',' << fmt12(emp.bin_edges[i + 1]) << ','
            << fmt12(emp.density[i]) << '\n';
    if (!out) throw Error("histogram_csv: write failed for " + path);
}

}  // namespace fe
