#include "dmfem/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dmfem/errors.hpp"

namespace dmfem {

namespace {

using SparseColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

SparseColMajor to_eigen(const CsrMatrix& a) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(a.nnz());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto cs = a.row_cols(r);
        const auto vs = a.row_values(r);
        for (std::size_t k = 0; k < cs.size(); ++k) {
            t.emplace_back(static_cast<int>(r), static_cast<int>(cs[k]), vs[k]);
        }
    }
    SparseColMajor m(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

void require_square(const CsrMatrix& a, std::size_t rhs) {
    if (a.rows() != a.cols()) throw InvalidArgument("matrix is not square");
    if (rhs != a.rows()) throw InvalidArgument("right-hand side has wrong size");
}

double relative_residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b) {
    DenseVector r = a * x;
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = b[k] - r[k];
    const double nb = norm2(b);
    return nb > 0.0 ? norm2(r) / nb : norm2(r);
}

// Platform-independent pseudo-random start vector, unit length.
DenseVector start_vector(std::size_t n) {
    std::mt19937_64 rng(0x5eed5eedULL);
    DenseVector v(n);
    for (double& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    const double nv = norm2(v);
    for (double& x : v) x /= nv;
    return v;
}

// ---- symmetric tridiagonal helpers for the Lanczos projection ----

// Number of eigenvalues of T below x (Sturm count via LDL^T pivots).
std::size_t sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x) {
    std::size_t count = 0;
    double q = diag[0] - x;
    const double tiny = std::numeric_limits<double>::min();
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
        if (q == 0.0) q = tiny;
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if (q < 0.0) ++count;
    }
    return count;
}

// k-th largest eigenvalue (k = 0 is the largest) by bisection.
double tridiagonal_eigenvalue_from_top(const std::vector<double>& diag, const std::vector<double>& off,
                                       std::size_t k) {
    const std::size_t m = diag.size();
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < m; ++i) {
        const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < m ? std::abs(off[i]) : 0.0);
        lo = std::min(lo, diag[i] - r);
        hi = std::max(hi, diag[i] + r);
    }
    const std::size_t below = m - 1 - k;  // eigenvalue index from the bottom
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(diag, off, mid) > below) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Solves the tridiagonal system (sub, d, sup) y = b with partial pivoting
// (LAPACK dgtsv layout). Zero pivots are nudged, as inverse iteration wants.
void solve_tridiagonal(std::vector<double> sub, std::vector<double> d, std::vector<double> sup,
                       std::vector<double>& b) {
    const std::size_t n = d.size();
    const double tiny = 1e-300;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(sub[i])) {
            if (d[i] == 0.0) d[i] = tiny;
            const double fact = sub[i] / d[i];
            d[i + 1] -= fact * sup[i];
            b[i + 1] -= fact * b[i];
            sub[i] = 0.0;
        } else {
            const double fact = d[i] / sub[i];
            d[i] = sub[i];
            const double temp = d[i + 1];
            d[i + 1] = sup[i] - fact * temp;
            if (i + 2 < n) {
                sub[i] = sup[i + 1];
                sup[i + 1] = -fact * sub[i];
            } else {
                sub[i] = 0.0;
            }
            sup[i] = temp;
            const double tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - fact * b[i + 1];
        }
    }
    if (d[n - 1] == 0.0) d[n - 1] = tiny;
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - sup[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;) {
        b[i] = (b[i] - sup[i] * b[i + 1] - sub[i] * b[i + 2]) / d[i];
    }
}

// |last component| of the unit eigenvector of T for eigenvalue theta.
double last_eigenvector_component(const std::vector<double>& diag, const std::vector<double>& off, double theta) {
    const std::size_t m = diag.size();
    if (m == 1) return 1.0;
    std::vector<double> d(m);
    for (std::size_t i = 0; i < m; ++i) d[i] = diag[i] - theta;
    std::vector<double> y(m, 1.0);
    for (int it = 0; it < 3; ++it) {
        solve_tridiagonal(off, d, off, y);
        double ny = 0.0;
        for (double v : y) ny += v * v;
        ny = std::sqrt(ny);
        for (double& v : y) v /= ny;
    }
    return std::abs(y.back());
}

}  // namespace

struct CholeskyFactor::Impl {
    Eigen::SimplicialLLT<SparseColMajor, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

CholeskyFactor::CholeskyFactor(const CsrMatrix& a) : impl_(std::make_unique<Impl>()), dim_(a.rows()) {
    if (a.rows() != a.cols()) throw InvalidArgument("matrix is not square");
    impl_->llt.compute(to_eigen(a));
    if (impl_->llt.info() != Eigen::Success) {
        throw NotSpdError("Cholesky factorization hit a non-positive pivot");
    }
}

CholeskyFactor::~CholeskyFactor() = default;
CholeskyFactor::CholeskyFactor(CholeskyFactor&&) noexcept = default;
CholeskyFactor& CholeskyFactor::operator=(CholeskyFactor&&) noexcept = default;

DenseVector CholeskyFactor::solve(std::span<const double> b) const {
    if (b.size() != dim_) throw InvalidArgument("right-hand side has wrong size");
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    const Eigen::VectorXd x = impl_->llt.solve(rhs);
    return DenseVector(x.data(), x.data() + x.size());
}

SolveResult cholesky_solve(const CsrMatrix& a, std::span<const double> b) {
    require_square(a, b.size());
    SolveResult out;
    out.report.method = "cholesky";
    if (a.rows() == 0) {
        out.report.converged = true;
        return out;
    }
    const CholeskyFactor factor(a);
    out.x = factor.solve(b);
    out.report.relative_residual = relative_residual(a, out.x, b);
    for (int step = 0; step < 3 && out.report.relative_residual > 1e-10; ++step) {
        DenseVector r = a * out.x;
        for (std::size_t k = 0; k < r.size(); ++k) r[k] = b[k] - r[k];
        const DenseVector dx = factor.solve(r);
        for (std::size_t k = 0; k < dx.size(); ++k) out.x[k] += dx[k];
        out.report.relative_residual = relative_residual(a, out.x, b);
    }
    out.report.converged = out.report.relative_residual <= 1e-10;
    return out;
}

SolveResult cg_solve(const CsrMatrix& a, std::span<const double> b, double tol, std::size_t max_iterations,
                     bool jacobi) {
    require_square(a, b.size());
    if (!(tol > 0.0 && tol < 1.0)) throw InvalidArgument("CG tolerance must lie in (0, 1)");
    const std::size_t n = a.rows();
    if (max_iterations == 0) max_iterations = 10 * std::max<std::size_t>(n, 1);

    SolveResult out;
    out.report.method = jacobi ? "pcg-jacobi" : "cg";
    out.x.assign(n, 0.0);
    const double nb = norm2(b);
    if (nb == 0.0) {
        out.report.converged = true;
        return out;
    }

    DenseVector inv_diag(n, 1.0);
    if (jacobi) {
        const DenseVector d = a.diagonal();
        for (std::size_t k = 0; k < n; ++k) {
            if (!(d[k] > 0.0)) throw NotSpdError("non-positive diagonal entry");
            inv_diag[k] = 1.0 / d[k];
        }
    }
    DenseVector r(b.begin(), b.end());
    DenseVector z(n);
    for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
    DenseVector p = z;
    DenseVector ap(n);
    double rz = dot(r, z);
    double rel = 1.0;
    std::size_t it = 0;
    while (it < max_iterations) {
        a.multiply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) throw NotSpdError("CG breakdown: p^T A p <= 0");
        const double alpha = rz / pap;
        for (std::size_t k = 0; k < n; ++k) {
            out.x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        ++it;
        rel = norm2(r) / nb;
        if (rel <= tol) break;
        for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    out.report.iterations = it;
    out.report.relative_residual = relative_residual(a, out.x, b);
    out.report.converged = rel <= tol;
    return out;
}

EigenEstimate lambda_max_lanczos(const CsrMatrix& a, double tol, std::size_t max_iterations) {
    if (a.rows() != a.cols() || a.rows() == 0) throw InvalidArgument("Lanczos needs a nonempty square matrix");
    const std::size_t n = a.rows();
    const std::size_t m_max = std::min(max_iterations, n);

    std::vector<DenseVector> basis;
    basis.reserve(m_max);
    basis.push_back(start_vector(n));
    std::vector<double> alpha;
    std::vector<double> beta;
    DenseVector w(n);
    EigenEstimate est;

    for (std::size_t k = 0; k < m_max; ++k) {
        const DenseVector& v = basis[k];
        a.multiply(v, w);
        const double ak = dot(w, v);
        alpha.push_back(ak);
        for (std::size_t i = 0; i < n; ++i) w[i] -= ak * v[i];
        if (k > 0) {
            for (std::size_t i = 0; i < n; ++i) w[i] -= beta[k - 1] * basis[k - 1][i];
        }
        // Full reorthogonalization, twice.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                const double c = dot(w, q);
                for (std::size_t i = 0; i < n; ++i) w[i] -= c * q[i];
            }
        }
        const double bk = norm2(w);

        const std::vector<double> off(beta.begin(), beta.end());
        const double theta = tridiagonal_eigenvalue_from_top(alpha, off, 0);
        est.value = theta;
        est.iterations = k + 1;

        const double scale = std::max(std::abs(theta), std::numeric_limits<double>::min());
        if (bk <= 1e-14 * scale || k + 1 == n) {
            est.converged = true;  // invariant subspace: Ritz values are exact
            break;
        }
        // |theta - lambda| <= ||A y - theta y|| for some eigenvalue lambda
        const double resid = bk * last_eigenvector_component(alpha, off, theta);
        if (resid <= tol * scale) {
            est.converged = true;
            break;
        }
        beta.push_back(bk);
        if (k + 1 < m_max) {
            DenseVector next(n);
            for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / bk;
            basis.push_back(std::move(next));
        }
    }
    return est;
}

EigenEstimate lambda_min_inverse_iteration(const CsrMatrix& a, double tol, std::size_t max_iterations) {
    const CholeskyFactor factor(a);
    return lambda_min_inverse_iteration(a, factor, tol, max_iterations);
}

EigenEstimate lambda_min_inverse_iteration(const CsrMatrix& a, const CholeskyFactor& factor, double tol,
                                           std::size_t max_iterations) {
    if (a.rows() != a.cols() || a.rows() == 0) throw InvalidArgument("inverse iteration needs a nonempty square matrix");
    if (factor.dim() != a.rows()) throw InvalidArgument("factor does not match the matrix");
    const std::size_t n = a.rows();
    DenseVector x = start_vector(n);
    DenseVector ax(n);
    EigenEstimate est;
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        DenseVector y = factor.solve(x);
        const double ny = norm2(y);
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
        a.multiply(x, ax);
        const double mu = dot(x, ax);
        if (!(mu > 0.0)) throw NotSpdError("inverse iteration produced a non-positive Rayleigh quotient");
        double r2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) r2 += (ax[i] - mu * x[i]) * (ax[i] - mu * x[i]);
        est.value = mu;
        est.iterations = it;
        if (std::sqrt(r2) <= tol * mu) {
            est.converged = true;
            break;
        }
    }
    return est;
}

SpectralEstimate condition_estimate(const CsrMatrix& a, double tol) {
    SpectralEstimate s;
    const EigenEstimate hi = lambda_max_lanczos(a, tol);
    const EigenEstimate lo = lambda_min_inverse_iteration(a, tol);
    s.lambda_max = hi.value;
    s.lambda_min = lo.value;
    s.kappa = hi.value / lo.value;
    s.lanczos_iterations = hi.iterations;
    s.inverse_iterations = lo.iterations;
    s.lanczos_converged = hi.converged;
    s.inverse_converged = lo.converged;
    return s;
}

}  // namespace dmfem
