#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>

#include "dmfem/sparse.hpp"

namespace dmfem {

struct SolveReport {
    std::size_t iterations = 0;  // 0 for direct solves
    double relative_residual = 0.0;
    std::string method;
    bool converged = false;
};

struct SolveResult {
    DenseVector x;
    SolveReport report;
};

/// Sparse LL^T factorization (fill-reducing ordering) of an SPD matrix.
/// Throws NotSpdError on a non-positive pivot.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const CsrMatrix& a);
    ~CholeskyFactor();
    CholeskyFactor(CholeskyFactor&&) noexcept;
    CholeskyFactor& operator=(CholeskyFactor&&) noexcept;

    std::size_t dim() const noexcept { return dim_; }
    DenseVector solve(std::span<const double> b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t dim_ = 0;
};

/// Direct solve with up to three steps of iterative refinement so that
/// ||A x - b|| <= 1e-10 ||b||.
SolveResult cholesky_solve(const CsrMatrix& a, std::span<const double> b);

/// Conjugate gradients, optionally Jacobi-preconditioned. Stops when
/// ||r|| <= tol ||b|| or after `max_iterations` (0 means 10 * dim); the
/// report says which. Throws NotSpdError on p^T A p <= 0.
SolveResult cg_solve(const CsrMatrix& a, std::span<const double> b, double tol = 1e-10,
                     std::size_t max_iterations = 0, bool jacobi = true);

struct EigenEstimate {
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

inline constexpr double kEigenTolerance = 1e-6;

/// Largest eigenvalue by Lanczos with full reorthogonalization.
EigenEstimate lambda_max_lanczos(const CsrMatrix& a, double tol = kEigenTolerance, std::size_t max_iterations = 1000);

/// Smallest eigenvalue by inverse power iteration on one Cholesky factor.
EigenEstimate lambda_min_inverse_iteration(const CsrMatrix& a, double tol = kEigenTolerance,
                                           std::size_t max_iterations = 10000);
EigenEstimate lambda_min_inverse_iteration(const CsrMatrix& a, const CholeskyFactor& factor,
                                           double tol = kEigenTolerance, std::size_t max_iterations = 10000);

struct SpectralEstimate {
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    double kappa = 0.0;  // lambda_max / lambda_min
    std::size_t lanczos_iterations = 0;
    std::size_t inverse_iterations = 0;
    bool lanczos_converged = false;
    bool inverse_converged = false;

    bool converged() const noexcept { return lanczos_converged && inverse_converged; }
};

/// Spectral condition number of an SPD matrix.
SpectralEstimate condition_estimate(const CsrMatrix& a, double tol = kEigenTolerance);

}  // namespace dmfem
