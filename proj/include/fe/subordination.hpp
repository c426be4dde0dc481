#pragma once
// Subordination fixed point for the product of two B-free elements:
// omega2(b) = lim g_b^n(w) with g_b(w) = b h_x(h_y(w) b), then h_{xy} and
// G_{xy}(zI).

#include <optional>

#include "fe/models.hpp"

namespace fe {

struct IterationConfig {
    double tol = 1e-12;
    int max_iter = 10000;
    double damping = 1.0;       // alpha in (0,1]; 1 = plain iteration
    std::optional<Matrix> w0;   // start point, default i*I

    void validate() const;  // throws Error on out-of-range fields
};

struct SubordinationResult {
    Matrix omega2;
    int iterations = 0;
    double residual = 0.0;  // ‖omega2 - g_b(omega2)‖_F, measured at exit
    bool im_lower_bound_ok = true;
};

// One application of g_b(w) = b·h_x(h_y(w)·b). Internally evaluated as
// h_{bx}(h_y(w)) in a form that needs no inverse of h_y(w)·b, so arguments
// that graze the real axis are handled exactly.
Matrix g_map(const OperatorModel& x, const OperatorModel& y, const Matrix& b,
             const Matrix& w);

// Damped fixed-point iteration w <- (1-a) w + a g_b(w) until
// ‖w_{k+1}-w_k‖ <= tol·max(1,‖w_k‖). Im b < 0 is routed through Schwarz
// reflection (computed at b*, adjoint returned). For strictly positive
// discrete x the result is tested against the lower bound
// Im omega2 >= [sum_i p_i (Im(b M_i))^{-1}]^{-1} - 10 tol.
SubordinationResult omega2(const OperatorModel& x, const OperatorModel& y,
                           const Matrix& b, const IterationConfig& cfg = {});

// omega1(b) = h_y(omega2(b))·b
Matrix omega1(const OperatorModel& x, const OperatorModel& y, const Matrix& b,
              const IterationConfig& cfg = {});

// h_{xy}(b) = b^{-1}·omega2(b)·h_y(omega2(b))
Matrix h_product(const OperatorModel& x, const OperatorModel& y, const Matrix& b,
                 const IterationConfig& cfg = {});

// G_{xy}(zI) = (zI - h_{xy}(z^{-1} I))^{-1} for Im z > 0; the inner transforms
// are evaluated at the adjoint argument conj(1/z)·I (upper half-plane) and
// reflected back. Guarantees Im(result) < 0 on the theorem's domain.
Matrix cauchy_product_scalar_point(const OperatorModel& x, const OperatorModel& y,
                                   cplx z, const IterationConfig& cfg = {});

// Point evaluator for grid sweeps. Keeps the converged omega2 and the inner
// Newton solutions as warm starts for the next (nearby) z; at(z, false)
// discards all carried state first, giving the cold-start result.
class ProductCauchyEvaluator {
public:
    ProductCauchyEvaluator(OperatorModel x, OperatorModel y, IterationConfig cfg);

    Matrix at(cplx z, bool warm = true);  // G_{xy}(zI), Im z > 0

    int last_iterations() const { return last_iters_; }
    double last_residual() const { return last_residual_; }

private:
    OperatorModel x_, y_;
    IterationConfig cfg_;
    int n_ = 0;
    std::optional<Matrix> warm_x_, warm_y_;  // inner resolvent seeds
    std::optional<Matrix> seed_;             // previous omega2 (upper frame)
    int last_iters_ = 0;
    double last_residual_ = 0.0;
};

}  // namespace fe
