#pragma once
// B-valued random-variable models over M_n(C) and their transform family:
// G (Cauchy), F = G^{-1}, eta, h, and E[.].

#include <optional>
#include <variant>
#include <vector>

#include "fe/matrix.hpp"

namespace fe {

struct DiscreteModel {
    struct Atom {
        double weight;
        Matrix m;
    };
    int dim = 0;
    std::vector<Atom> atoms;

    // validates weights (>0, sum 1 within 1e-12) and Hermitian atoms (1e-12)
    static DiscreteModel make(std::vector<Atom> atoms);
    // scalar distribution t_i expanded to t_i * I_n
    static DiscreteModel scalar(int n, const std::vector<double>& support,
                                const std::vector<double>& weights);
};

struct CovarianceMap {
    int dim = 0;
    std::vector<Matrix> family;  // Hermitian A_k; apply(b) = sum A_k b A_k

    static CovarianceMap make(std::vector<Matrix> family);
    Matrix apply(const Matrix& b) const;
};

struct SemicircularModel {
    int dim = 0;
    CovarianceMap covariance;
    double shift = 0.0;  // added as shift * I

    static SemicircularModel make(CovarianceMap cov, double shift);
    static SemicircularModel make(int dim, CovarianceMap cov, double shift);  // empty family needs dim
};

using OperatorModel = std::variant<DiscreteModel, SemicircularModel>;

int model_dim(const OperatorModel& m);
bool is_discrete(const OperatorModel& m);

// E[model]: sum p_i M_i, or shift * I.
Matrix expectation(const OperatorModel& m);

// G(b) = E[(b - x)^{-1}] on either operator half-plane (Schwarz reflection
// f(b*) = f(b)* for Im b < 0); DomainEscape when Im b is indefinite.
Matrix cauchy(const OperatorModel& m, const Matrix& b);

// Literal HRS fixed point: W <- (-ib + cov(W))^{-1} from W0 = iI, stop when
// ||W_{k+1} - W_k|| <= tol * max(1, ||W_k||); returns G = -iW.
// Requires Im b > 0 after absorbing the shift.
Matrix semicircular_cauchy(const SemicircularModel& m, const Matrix& b,
                           double tol = 1e-12, int max_iter = 20000);

// F(b) = G(b)^{-1}.
Matrix reciprocal_cauchy(const OperatorModel& m, const Matrix& b);

// h(w) = w^{-1} - F(w^{-1}), via a formulation regular at singular w
// (h(0) = E[model]).
Matrix h_transform(const OperatorModel& m, const Matrix& w);

// eta(b) = b * h(b).
Matrix eta_transform(const OperatorModel& m, const Matrix& b);

struct PairReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

// Theorem hypotheses: x >= 0 in every atom / shifted to positivity; zero
// eigenvalues of x and singular E[y] downgrade to warnings (finite-dim B).
PairReport validate_pair(const OperatorModel& x, const OperatorModel& y);

// --------------------------------------------------------------------------
// internal semicircular evaluator (shared with subordination)
// --------------------------------------------------------------------------

// Gamma(m) = E[(m - b s)^{-1}] for the centered semicircular s with the given
// covariance; requires Im m definite (either sign). Solves the twisted
// functional equation Gamma = (m - b cov(Gamma b))^{-1} by Newton continuation
// from +-iR * I; the analytic branch is certified by sign(Im Gamma) =
// -sign(Im m). `warm` (may be nullptr) seeds Newton and receives the solution.
Matrix semicircular_twisted_resolvent(const CovarianceMap& cov, const Matrix& b,
                                      const Matrix& m,
                                      std::optional<Matrix>* warm = nullptr);

// G of a semicircular model at any definite-imaginary-part argument, via the
// continuation evaluator (b_twist = I).
Matrix semicircular_cauchy_continued(const SemicircularModel& m, const Matrix& b,
                                     std::optional<Matrix>* warm = nullptr);

}  // namespace fe
