#include "fe/models.hpp"

#include <algorithm>
#include <cmath>

namespace fe {

// ---------------------------------------------------------------------------
// construction & validation
// ---------------------------------------------------------------------------

DiscreteModel DiscreteModel::make(std::vector<Atom> atoms) {
    if (atoms.empty()) throw UnsupportedModel("discrete model needs at least one atom");
    const int n = atoms.front().m.dim();
    double sum = 0.0;
    for (const auto& a : atoms) {
        if (a.m.dim() != n) throw DimensionMismatch("discrete model: atom dims differ");
        if (a.weight <= 0.0) throw UnsupportedModel("discrete model: weight <= 0");
        if (!is_hermitian(a.m, 1e-12))
            throw NotHermitian("discrete model: atom matrix not Hermitian");
        require_finite(a.m, "discrete atom");
        sum += a.weight;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw UnsupportedModel("discrete model: weights sum to " + std::to_string(sum));
    DiscreteModel m;
    m.dim = n;
    m.atoms = std::move(atoms);
    return m;
}

DiscreteModel DiscreteModel::scalar(int n, const std::vector<double>& support,
                                    const std::vector<double>& weights) {
    std::vector<Atom> atoms;
    const size_t k = support.size();
    for (size_t i = 0; i < k; ++i) {
        const double w = weights.empty() ? 1.0 / double(k) : weights[i];
        atoms.push_back({w, Matrix::scalar(n, support[i])});
    }
    return make(std::move(atoms));
}

CovarianceMap CovarianceMap::make(std::vector<Matrix> family) {
    CovarianceMap c;
    if (!family.empty()) {
        c.dim = family.front().dim();
        for (const auto& a : family) {
            if (a.dim() != c.dim)
                throw DimensionMismatch("covariance family: dims differ");
            if (!is_hermitian(a, 1e-12))
                throw NotHermitian("covariance family: A_k not Hermitian");
        }
    }
    c.family = std::move(family);
    return c;
}

Matrix CovarianceMap::apply(const Matrix& b) const {
    Matrix r(b.dim());
    for (const auto& a : family) r += a * b * a;
    return r;
}

SemicircularModel SemicircularModel::make(CovarianceMap cov, double shift) {
    if (cov.dim == 0)
        throw UnsupportedModel("semicircular model with empty family needs explicit dim");
    SemicircularModel m;
    m.dim = cov.dim;
    m.covariance = std::move(cov);
    m.shift = shift;
    return m;
}

SemicircularModel SemicircularModel::make(int dim, CovarianceMap cov, double shift) {
    if (cov.dim != 0 && cov.dim != dim)
        throw DimensionMismatch("semicircular model: covariance dim mismatch");
    SemicircularModel m;
    m.dim = dim;
    m.covariance = std::move(cov);
    m.covariance.dim = dim;
    m.shift = shift;
    return m;
}

int model_dim(const OperatorModel& m) {
    return std::visit([](const auto& v) { return v.dim; }, m);
}

bool is_discrete(const OperatorModel& m) {
    return std::holds_alternative<DiscreteModel>(m);
}

Matrix expectation(const OperatorModel& m) {
    if (const auto* d = std::get_if<DiscreteModel>(&m)) {
        Matrix e(d->dim);
        for (const auto& a : d->atoms) e += a.weight * a.m;
        return e;
    }
    const auto& s = std::get<SemicircularModel>(m);
    return Matrix::scalar(s.dim, s.shift);
}

// ---------------------------------------------------------------------------
// half-plane bookkeeping
// ---------------------------------------------------------------------------

namespace {

enum class Side { upper, lower };

// strictly definite imaginary part, or DomainEscape
Side imag_side(const Matrix& b, const char* who) {
    const Matrix im = imag_part(b);
    const auto dec = hermitian_eigen(im);
    if (dec.eigenvalues.front() > 0.0) return Side::upper;
    if (dec.eigenvalues.back() < 0.0) return Side::lower;
    throw DomainEscape(std::string(who) + ": argument on neither operator half-plane "
                       "(Im eigenvalues span [" +
                       std::to_string(dec.eigenvalues.front()) + ", " +
                       std::to_string(dec.eigenvalues.back()) + "])");
}

Matrix discrete_resolvent_sum(const DiscreteModel& d, const Matrix& b) {
    Matrix g(d.dim);
    for (const auto& a : d.atoms) g += a.weight * inverse(b - a.m);
    return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// transforms
// ---------------------------------------------------------------------------

Matrix cauchy(const OperatorModel& m, const Matrix& b) {
    require_finite(b, "cauchy");
    const Side side = imag_side(b, "cauchy");
    if (side == Side::lower) return adjoint(cauchy(m, adjoint(b)));
    if (const auto* d = std::get_if<DiscreteModel>(&m))
        return discrete_resolvent_sum(*d, b);
    return semicircular_cauchy_continued(std::get<SemicircularModel>(m), b);
}

Matrix semicircular_cauchy(const SemicircularModel& m, const Matrix& b,
                           double tol, int max_iter) {
    require_finite(b, "semicircular_cauchy");
    const Matrix q = b - Matrix::scalar(m.dim, m.shift);
    if (imag_side(q, "semicircular_cauchy") != Side::upper)
        throw DomainEscape("semicircular_cauchy: Im b not positive after shift");
    const Matrix mi = Matrix::scalar(m.dim, cplx(0.0, -1.0)) * q;  // -i b
    Matrix w = Matrix::scalar(m.dim, cplx(0.0, 1.0));
    for (int k = 0; k < max_iter; ++k) {
        const Matrix wn = inverse(mi + m.covariance.apply(w));
        const double step = fro_norm(wn - w);
        const double scale = std::max(1.0, fro_norm(w));
        w = wn;
        if (step <= tol * scale)
            return Matrix::scalar(m.dim, cplx(0.0, -1.0)) * w;
    }
    throw NoConvergence("semicircular_cauchy: HRS iteration", max_iter,
                        fro_norm(inverse(mi + m.covariance.apply(w)) - w));
}

Matrix reciprocal_cauchy(const OperatorModel& m, const Matrix& b) {
    return inverse(cauchy(m, b));
}

// h(w) = w^{-1} - F(w^{-1}) computed in a form with no free-standing w^{-1}:
// discrete:      h(w) = [sum p_i (I - M_i w)^{-1} M_i] [sum p_i (I - w M_i)^{-1}]^{-1}
// semicircular:  h(w) = shift*I + cov(G_0(w^{-1} - shift*I))
// Both reduce to E[model] at w = 0.
Matrix h_transform(const OperatorModel& m, const Matrix& w) {
    require_finite(w, "h_transform");
    const int n = model_dim(m);
    if (fro_norm(w) == 0.0) return expectation(m);

    if (const auto* d = std::get_if<DiscreteModel>(&m)) {
        const Matrix id = Matrix::identity(n);
        Matrix num(n), den(n);
        for (const auto& a : d->atoms) {
            num += a.weight * (inverse(id - a.m * w) * a.m);
            den += a.weight * inverse(id - w * a.m);
        }
        return num * inverse(den);
    }

    const auto& s = std::get<SemicircularModel>(m);
    const Matrix q = inverse(w) - Matrix::scalar(n, s.shift);
    SemicircularModel centered = s;
    centered.shift = 0.0;
    const Matrix g0 = semicircular_cauchy_continued(centered, q);
    return Matrix::scalar(n, s.shift) + s.covariance.apply(g0);
}

Matrix eta_transform(const OperatorModel& m, const Matrix& b) {
    if (fro_norm(b) == 0.0) return Matrix(model_dim(m));
    return b * h_transform(m, b);
}

// ---------------------------------------------------------------------------
// pair validation
// ---------------------------------------------------------------------------

PairReport validate_pair(const OperatorModel& x, const OperatorModel& y) {
    PairReport rep;
    if (model_dim(x) != model_dim(y)) {
        rep.errors.push_back("x and y have different dims");
        return rep;
    }

    if (const auto* d = std::get_if<DiscreteModel>(&x)) {
        bool zero_eig = false;
        for (size_t i = 0; i < d->atoms.size(); ++i) {
            const double lo = min_eigenvalue(d->atoms[i].m);
            if (lo < -1e-12) {
                rep.errors.push_back("x not positive: atom " + std::to_string(i) +
                                     " has eigenvalue " + std::to_string(lo) +
                                     "; x must be strictly positive");
            } else if (lo <= 1e-12) {
                zero_eig = true;
            }
        }
        if (zero_eig && rep.errors.empty())
            rep.warnings.push_back(
                "x has a zero eigenvalue in some atom; x >= 0 but not > 0 "
                "(admissible for finite-dimensional B)");
    } else {
        const auto& s = std::get<SemicircularModel>(x);
        // ||S|| <= 2 ||sum A_k^2||^{1/2}: certified positivity via the shift
        Matrix sq(s.dim);
        for (const auto& a : s.covariance.family) sq += a * a;
        const double bound = 2.0 * std::sqrt(std::max(0.0, max_eigenvalue(sq)));
        if (s.shift <= 0.0 && !s.covariance.family.empty())
            rep.errors.push_back(
                "x must be strictly positive: semicircular x needs a positive shift");
        else if (s.shift <= 0.0)
            rep.errors.push_back(
                "x must be strictly positive: constant x = shift*I needs shift > 0");
        else if (s.shift + 1e-12 < bound)
            rep.warnings.push_back(
                "cannot certify x > 0: shift " + std::to_string(s.shift) +
                " below the norm bound " + std::to_string(bound) +
                " = 2*||sum A_k^2||^(1/2)");
        else if (s.shift < bound + 1e-12 && !s.covariance.family.empty())
            rep.warnings.push_back(
                "x >= 0 with spectral edge at 0: shift equals the norm bound " +
                std::to_string(bound));
    }

    const Matrix ey = expectation(y);
    bool ey_singular = false;
    try {
        (void)inverse(ey);
    } catch (const SingularMatrix&) {
        ey_singular = true;
    }
    if (ey_singular)
        rep.warnings.push_back(
            "E[y] is singular; invertibility is not required over "
            "finite-dimensional B");
    return rep;
}

}  // namespace fe
