#include "fe/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace fe {

Matrix Matrix::identity(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::scalar(int n, cplx s) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = s;
    return m;
}

static void require_same_dim(const Matrix& a, const Matrix& b, const char* op) {
    if (a.dim() != b.dim())
        throw DimensionMismatch(std::string(op) + ": dims " + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()));
}

Matrix& Matrix::operator+=(const Matrix& o) {
    require_same_dim(*this, o, "add");
    for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    require_same_dim(*this, o, "sub");
    for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
}

Matrix& Matrix::operator*=(cplx s) {
    for (auto& v : a_) v *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

Matrix operator-(const Matrix& a) {
    Matrix r(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) r(i, j) = -a(i, j);
    return r;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    require_same_dim(a, b, "mul");
    const int n = a.dim();
    Matrix r(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx(0.0)) continue;
            for (int j = 0; j < n; ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

Matrix operator*(cplx s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, cplx s) { return a *= s; }

Matrix adjoint(const Matrix& a) {
    const int n = a.dim();
    Matrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = std::conj(a(j, i));
    return r;
}

Matrix imag_part(const Matrix& a) {
    const int n = a.dim();
    Matrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            r(i, j) = (a(i, j) - std::conj(a(j, i))) / cplx(0.0, 2.0);
    return r;
}

Matrix real_part(const Matrix& a) {
    const int n = a.dim();
    Matrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            r(i, j) = (a(i, j) + std::conj(a(j, i))) / 2.0;
    return r;
}

cplx trace(const Matrix& a) {
    cplx t = 0.0;
    for (int i = 0; i < a.dim(); ++i) t += a(i, i);
    return t;
}

cplx normalized_trace(const Matrix& a) { return trace(a) / double(a.dim()); }

double fro_norm(const Matrix& a) {
    double s = 0.0;
    for (const auto& v : a.data()) s += std::norm(v);
    return std::sqrt(s);
}

bool all_finite(const Matrix& a) {
    for (const auto& v : a.data())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

void require_finite(const Matrix& a, const char* where) {
    if (!all_finite(a))
        throw Error(std::string(where) + ": non-finite matrix entries");
}

bool is_hermitian(const Matrix& a, double rel_tol) {
    double diff = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j)
            diff += std::norm(a(i, j) - std::conj(a(j, i)));
    return std::sqrt(diff) <= rel_tol * std::max(1e-300, fro_norm(a));
}

// ---------------------------------------------------------------------------
// Gauss-Jordan with partial pivoting
// ---------------------------------------------------------------------------

Matrix inverse(const Matrix& a) {
    const int n = a.dim();
    const double pivot_floor = 1e-14 * fro_norm(a);
    Matrix w = a;
    Matrix inv = Matrix::identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(w(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(w(r, col));
            if (v > best) { best = v; piv = r; }
        }
        if (best <= pivot_floor)
            throw SingularMatrix("pivot " + std::to_string(best) + " below " +
                                 std::to_string(pivot_floor) + " at column " +
                                 std::to_string(col));
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(w(piv, j), w(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        const cplx d = w(col, col);
        for (int j = 0; j < n; ++j) { w(col, j) /= d; inv(col, j) /= d; }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx f = w(r, col);
            if (f == cplx(0.0)) continue;
            for (int j = 0; j < n; ++j) {
                w(r, j) -= f * w(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

std::vector<cplx> solve(const Matrix& a, std::vector<cplx> rhs) {
    const int n = a.dim();
    if (static_cast<int>(rhs.size()) != n)
        throw DimensionMismatch("solve: rhs size mismatch");
    const double pivot_floor = 1e-14 * fro_norm(a);
    Matrix w = a;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(w(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(w(r, col));
            if (v > best) { best = v; piv = r; }
        }
        if (best <= pivot_floor)
            throw SingularMatrix("solve: pivot below threshold at column " +
                                 std::to_string(col));
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(w(piv, j), w(col, j));
            std::swap(rhs[piv], rhs[col]);
        }
        for (int r = col + 1; r < n; ++r) {
            const cplx f = w(r, col) / w(col, col);
            if (f == cplx(0.0)) continue;
            for (int j = col; j < n; ++j) w(r, j) -= f * w(col, j);
            rhs[r] -= f * rhs[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        cplx s = rhs[r];
        for (int j = r + 1; j < n; ++j) s -= w(r, j) * rhs[j];
        rhs[r] = s / w(r, r);
    }
    return rhs;
}

// ---------------------------------------------------------------------------
// cyclic complex Jacobi
// ---------------------------------------------------------------------------

static double offdiag_mass(const Matrix& h) {
    double s = 0.0;
    for (int i = 0; i < h.dim(); ++i)
        for (int j = 0; j < h.dim(); ++j)
            if (i != j) s += std::norm(h(i, j));
    return std::sqrt(s);
}

HermitianDecomposition hermitian_eigen(const Matrix& h) {
    const int n = h.dim();
    if (!is_hermitian(h))
        throw NotHermitian("hermitian_eigen: ||h - h*|| exceeds 1e-10 * ||h||");

    const double norm = std::max(1e-300, fro_norm(h));
    const double target = 1e-12 * norm;

    Matrix a = h;
    // symmetrize exactly so round-off in the input cannot accumulate
    for (int i = 0; i < n; ++i) {
        a(i, i) = cplx(a(i, i).real(), 0.0);
        for (int j = i + 1; j < n; ++j) {
            const cplx m = (a(i, j) + std::conj(a(j, i))) / 2.0;
            a(i, j) = m;
            a(j, i) = std::conj(m);
        }
    }
    Matrix q = Matrix::identity(n);

    int sweep = 0;
    for (; sweep < 100 && offdiag_mass(a) >= target; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int qq = p + 1; qq < n; ++qq) {
                const cplx apq = a(p, qq);
                const double mag = std::abs(apq);
                if (mag == 0.0) continue;
                // phase to make the pivot real, then a real rotation
                const cplx phase = apq / mag;
                const double app = a(p, p).real(), aqq = a(qq, qq).real();
                const double tau = (aqq - app) / (2.0 * mag);
                const double t = (tau >= 0 ? -1.0 : 1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // J: column p gets (c * phase, s), column q gets (-s * phase, c)
                const cplx jp = c * phase, jq = -s * phase;
                for (int k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, qq);
                    a(k, p) = akp * jp + akq * s;
                    a(k, qq) = akp * jq + akq * c;
                    const cplx qkp = q(k, p), qkq = q(k, qq);
                    q(k, p) = qkp * jp + qkq * s;
                    q(k, qq) = qkp * jq + qkq * c;
                }
                for (int k = 0; k < n; ++k) {
                    const cplx apk = a(p, k), aqk = a(qq, k);
                    a(p, k) = std::conj(jp) * apk + s * aqk;
                    a(qq, k) = std::conj(jq) * apk + c * aqk;
                }
                a(p, qq) = 0.0;
                a(qq, p) = 0.0;
                a(p, p) = cplx(a(p, p).real(), 0.0);
                a(qq, qq) = cplx(a(qq, qq).real(), 0.0);
            }
        }
    }
    if (offdiag_mass(a) >= target)
        throw NoConvergence("hermitian_eigen: Jacobi did not converge", sweep,
                            offdiag_mass(a) / norm);

    HermitianDecomposition dec;
    dec.eigenvalues.resize(n);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) { dec.eigenvalues[i] = a(i, i).real(); order[i] = i; }
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        return a(x, x).real() < a(y, y).real();
    });
    std::sort(dec.eigenvalues.begin(), dec.eigenvalues.end());
    dec.eigenvectors = Matrix(n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) dec.eigenvectors(i, j) = q(i, order[j]);
    return dec;
}

bool is_strictly_positive(const Matrix& h, double margin) {
    return min_eigenvalue(h) > margin;
}

double min_eigenvalue(const Matrix& h) {
    return hermitian_eigen(h).eigenvalues.front();
}

double max_eigenvalue(const Matrix& h) {
    return hermitian_eigen(h).eigenvalues.back();
}

Matrix sqrt_psd(const Matrix& h) {
    const auto dec = hermitian_eigen(h);
    const int n = h.dim();
    const double floor = -1e-10 * std::max(1.0, fro_norm(h));
    for (double lam : dec.eigenvalues)
        if (lam < floor)
            throw Error("sqrt_psd: eigenvalue " + std::to_string(lam) + " is negative");
    Matrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cplx s = 0.0;
            for (int k = 0; k < n; ++k) {
                const double lam = std::max(0.0, dec.eigenvalues[k]);
                s += dec.eigenvectors(i, k) * std::sqrt(lam) *
                     std::conj(dec.eigenvectors(j, k));
            }
            r(i, j) = s;
        }
    return r;
}

}  // namespace fe
