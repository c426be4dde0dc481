#include <algorithm>
#include <cmath>

#include "fe/models.hpp"

// Twisted resolvent Gamma(m) = E[(m - b s)^{-1}] of a centered operator-valued
// semicircular s, for Im m strictly definite. Solves
//     Gamma = (m - b cov(Gamma b))^{-1}
// by Newton steps on R(Gamma) = (m - b cov(Gamma b)) Gamma - I, continuing
// along the convex path from m0 = (sign) iR * I (where Gamma ~ m^{-1}); the
// path stays inside the half-plane, where m - b s is provably invertible, so
// the analytic branch is tracked; it is certified per step by
// sign(Im Gamma) = -sign(Im m).

namespace fe {

namespace {

// column-major vec: vec(A X B) = (B^T (x) A) vec(X)
void vec_col_major(const Matrix& x, std::vector<cplx>& out) {
    const int n = x.dim();
    out.resize(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) out[static_cast<size_t>(j) * n + i] = x(i, j);
}

Matrix unvec_col_major(const std::vector<cplx>& v, int n) {
    Matrix x(n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = v[static_cast<size_t>(j) * n + i];
    return x;
}

// J = I (x) P - sum_k (b A_k Gamma)^T (x) (b A_k)
Matrix newton_jacobian(const Matrix& p, const std::vector<Matrix>& ba,
                       const Matrix& gamma) {
    const int n = p.dim();
    Matrix j(n * n);
    for (int jc = 0; jc < n; ++jc)
        for (int ic = 0; ic < n; ++ic)
            for (int ir = 0; ir < n; ++ir)
                j(jc * n + ir, jc * n + ic) += p(ir, ic);
    for (const auto& m : ba) {
        const Matrix t = m * gamma;  // (b A_k Gamma)
        for (int jc = 0; jc < n; ++jc)
            for (int ic = 0; ic < n; ++ic) {
                const cplx tij = t(ic, jc);  // transpose entry (jc,ic) of t^T
                if (tij == cplx(0.0)) continue;
                for (int jr = 0; jr < n; ++jr)
                    for (int ir = 0; ir < n; ++ir)
                        j(jc * n + ir, ic * n + jr) -= tij * m(ir, jr);
            }
    }
    return j;
}

struct TwistedEq {
    const CovarianceMap& cov;
    const Matrix& b;
    std::vector<Matrix> ba;  // b * A_k

    TwistedEq(const CovarianceMap& c, const Matrix& bm) : cov(c), b(bm) {
        ba.reserve(cov.family.size());
        for (const auto& a : cov.family) ba.push_back(b * a);
    }

    Matrix p_of(const Matrix& gamma, const Matrix& m) const {
        Matrix acc(m.dim());
        for (const auto& ka : cov.family) acc += ka * (gamma * b) * ka;
        return m - b * acc;
    }

    // Newton from seed; returns true on success
    bool solve_at(const Matrix& m, Matrix& gamma, double tol, int sign) const {
        const int n = m.dim();
        std::vector<cplx> fv, dv;
        for (int it = 0; it < 40; ++it) {
            const Matrix p = p_of(gamma, m);
            const Matrix f = p * gamma - Matrix::identity(n);
            const double fn = fro_norm(f);
            if (fn <= tol) {
                // branch certificate: Im Gamma opposes Im m
                const Matrix im = imag_part(gamma);
                const auto dec = hermitian_eigen(im);
                if (sign > 0)  // Im m > 0 => Im Gamma < 0
                    return dec.eigenvalues.back() < 1e-9 * std::max(1.0, fro_norm(gamma));
                return dec.eigenvalues.front() > -1e-9 * std::max(1.0, fro_norm(gamma));
            }
            if (!std::isfinite(fn) || fro_norm(gamma) > 1e12) return false;
            const Matrix j = newton_jacobian(p, ba, gamma);
            vec_col_major(f, fv);
            for (auto& v : fv) v = -v;
            try {
                dv = solve(j, fv);
            } catch (const SingularMatrix&) {
                return false;
            }
            gamma += unvec_col_major(dv, n);
        }
        return false;
    }
};

}  // namespace

Matrix semicircular_twisted_resolvent(const CovarianceMap& cov, const Matrix& b,
                                      const Matrix& m,
                                      std::optional<Matrix>* warm) {
    require_finite(m, "semicircular resolvent");
    const int n = m.dim();
    const Matrix im = imag_part(m);
    const auto dec = hermitian_eigen(im);
    int sign;
    if (dec.eigenvalues.front() > 0.0) sign = +1;
    else if (dec.eigenvalues.back() < 0.0) sign = -1;
    else
        throw DomainEscape("semicircular resolvent: Im m indefinite");

    const TwistedEq eq(cov, b);
    const double tol = 1e-13 * std::max(1.0, 1.0 / std::max(1e-8, fro_norm(m)));

    if (warm && warm->has_value()) {
        Matrix g = **warm;
        if (eq.solve_at(m, g, tol, sign)) {
            **warm = g;
            return g;
        }
    }

    // cold start: continuation from deep inside the half-plane
    double scale = 1.0 + fro_norm(b);
    for (const auto& a : cov.family) scale = std::max(scale, fro_norm(a));
    const double r = 10.0 * (1.0 + fro_norm(m)) * std::max(1.0, fro_norm(b)) * scale;
    const Matrix m0 = Matrix::scalar(n, cplx(0.0, sign * r));
    Matrix g = inverse(m0);
    double s = 0.0, step = 1.0;
    int guard = 0;
    while (s < 1.0) {
        if (++guard > 400)
            throw NoConvergence("semicircular resolvent: continuation stalled",
                                guard, s);
        const double sn = std::min(1.0, s + step);
        Matrix mt(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                mt(i, j) = (1.0 - sn) * m0(i, j) + sn * m(i, j);
        Matrix trial = g;
        if (eq.solve_at(mt, trial, tol, sign)) {
            g = trial;
            s = sn;
            step = std::min(1.0, step * 2.0);
        } else {
            step /= 2.0;
            if (step < 1e-8)
                throw NoConvergence("semicircular resolvent: step underflow", guard, s);
        }
    }
    if (warm) *warm = g;
    return g;
}

Matrix semicircular_cauchy_continued(const SemicircularModel& mod, const Matrix& b,
                                     std::optional<Matrix>* warm) {
    const int n = mod.dim;
    const Matrix q = b - Matrix::scalar(n, mod.shift);
    if (mod.covariance.family.empty()) return inverse(q);
    return semicircular_twisted_resolvent(mod.covariance, Matrix::identity(n), q, warm);
}

}  // namespace fe
