#pragma once
// Finite-N Monte Carlo oracle: realize the model pair as random matrices,
// eigensolve the positively-represented product per trial, histogram across
// trials.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fe/density.hpp"
#include "fe/models.hpp"

namespace fe {

struct NonPositiveRealization : Error {
    using Error::Error;
};

// Deterministic source of uniforms and normals. Normals come from the
// Marsaglia polar method (std::normal_distribution is implementation-defined,
// which would break the byte-reproducibility contract).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}

    double uniform();  // [0,1), 53-bit resolution
    double normal();   // N(0,1)

private:
    std::mt19937_64 g_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct SimulationSpec {
    OperatorModel x_model;
    OperatorModel y_model;
    int matrix_size = 500;  // N per block; realizations are nN x nN
    int trials = 100;
    std::uint64_t seed = 1;
    int bins = 200;
    // For a k-block corner embedding the product carries nN(1-1/k) structural
    // zero eigenvalues per trial; they are dropped before histogramming.
    int unwrap_k = 1;

    void validate() const;  // throws Error on out-of-range fields
};

struct EmpiricalSpectrum {
    std::vector<double> eigenvalues;  // all trials, ascending within a trial
    std::vector<double> bin_edges;    // bins + 1, ascending, uniform
    std::vector<double> density;      // bins, integrates to exactly 1
};

// Hermitian N x N, off-diagonal complex Gaussian variance 1/N, diagonal real
// Gaussian variance 1/N.
Matrix sample_wigner(int N, Rng& rng);

// QR of a complex Ginibre matrix with the R_ii/|R_ii| phase fix absorbed
// into Q.
Matrix sample_haar_unitary(int N, Rng& rng);

// Discrete models: deterministic proportional diagonal fill (floor(p_i N)
// slots per atom, remainder to the largest weights) laid out as n x n blocks
// of N x N diagonals, optionally conjugated by I_n (x) U with U Haar.
// Semicircular: sum_k A_k (x) W_k + shift I with independent Wigner W_k.
Matrix realize_model(const OperatorModel& model, int N, Rng& rng,
                     bool haar_conjugate);

// Per trial (stream seed ^ trial_index): realize X then Y, eigensolve the
// Hermitian positive representative of XY, drop structural zeros per
// unwrap_k, aggregate, histogram. X factors are Haar-conjugated iff both
// models are discrete.
EmpiricalSpectrum product_spectrum(const SimulationSpec& spec);

// L1 distance at histogram resolution: sum over bins of |curve mass -
// histogram mass|, plus any curve mass outside the binned range. Comparing
// masses per bin keeps the distance meaningful when the density has features
// narrower than a bin (or outright atoms, where a pointwise integrand would
// saturate near 2 regardless of agreement). Disjoint supports give 2.
// Throws Error on an empty histogram.
double l1_distance(const DensityCurve& curve, const EmpiricalSpectrum& emp);

// [min eigenvalue - 0.5, max eigenvalue + 0.5]
std::pair<double, double> suggested_grid_bounds(const EmpiricalSpectrum& emp);

void eigenvalues_csv(const EmpiricalSpectrum& emp, const std::string& path);
void histogram_csv(const EmpiricalSpectrum& emp, const std::string& path);

// Ascending eigenvalues of a Hermitian matrix via the same LAPACK backend the
// trials use (the Jacobi solver in matrix.hpp is for small blocks only).
std::vector<double> dense_eigenvalues(const Matrix& h);

}  // namespace fe
