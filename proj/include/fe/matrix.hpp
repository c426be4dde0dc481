#pragma once
// Dense complex n x n matrices (n small) with the arithmetic, inversion and
// Hermitian eigensolver everything else is built on.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fe {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// error taxonomy
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct SingularMatrix : Error {
    using Error::Error;
};

struct NotHermitian : Error {
    using Error::Error;
};

struct NoConvergence : Error {
    int iterations = 0;
    double residual = 0.0;
    NoConvergence(const std::string& what, int iters, double res)
        : Error(what + " (iterations=" + std::to_string(iters) +
                ", residual=" + std::to_string(res) + ")"),
          iterations(iters), residual(res) {}
};

struct DomainEscape : Error {
    using Error::Error;
};

struct InvalidPair : Error {
    using Error::Error;
};

struct UnsupportedModel : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int n) : n_(n), a_(static_cast<size_t>(n) * n) {
        if (n < 1) throw DimensionMismatch("matrix dimension must be >= 1");
    }

    static Matrix identity(int n);
    static Matrix scalar(int n, cplx s);  // s * I

    int dim() const { return n_; }

    cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

    const std::vector<cplx>& data() const { return a_; }

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(cplx s);

private:
    int n_ = 0;
    std::vector<cplx> a_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(const Matrix& a);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(cplx s, Matrix a);
Matrix operator*(Matrix a, cplx s);

Matrix adjoint(const Matrix& a);
Matrix imag_part(const Matrix& a);  // (a - a*)/(2i), Hermitian by construction
Matrix real_part(const Matrix& a);  // (a + a*)/2

cplx trace(const Matrix& a);
cplx normalized_trace(const Matrix& a);  // trace / n
double fro_norm(const Matrix& a);
bool all_finite(const Matrix& a);
void require_finite(const Matrix& a, const char* where);

bool is_hermitian(const Matrix& a, double rel_tol = 1e-10);

// Gaussian elimination with partial pivoting; SingularMatrix when a pivot
// falls below 1e-14 * ||a||_F.
Matrix inverse(const Matrix& a);

// Solve A x = rhs for a single right-hand side (same pivoting rule).
std::vector<cplx> solve(const Matrix& a, std::vector<cplx> rhs);

struct HermitianDecomposition {
    std::vector<double> eigenvalues;  // ascending
    Matrix eigenvectors;              // unitary, columns matching eigenvalues
};

// Cyclic complex Jacobi; off-diagonal Frobenius mass < 1e-12 * ||h||, at most
// 100 sweeps. Throws NotHermitian / NoConvergence.
HermitianDecomposition hermitian_eigen(const Matrix& h);

// true iff min eigenvalue > margin (h Hermitian, else NotHermitian).
bool is_strictly_positive(const Matrix& h, double margin = 0.0);

double min_eigenvalue(const Matrix& h);
double max_eigenvalue(const Matrix& h);

// PSD square root via hermitian_eigen; negative eigenvalues below
// -1e-10 * ||h|| are rejected, round-off negatives are clipped.
Matrix sqrt_psd(const Matrix& h);

}  // namespace fe
