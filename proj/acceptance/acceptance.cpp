// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dense_eigen.hpp"
#include "dmfem/assembly.hpp"
#include "dmfem/quadrature.hpp"
#include "dmfem/solver.hpp"
#include "dmfem/stabilized.hpp"
#include "dmfem/study.hpp"

using namespace dmfem;

namespace {

const std::vector<std::size_t> kLadder{16, 27, 44, 73, 121};
const std::vector<std::size_t> kDense{9, 18, 36, 63, 108};
constexpr const char* kTen = "count:10:1";

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }
bool within_factor(double v, double ref, double f) { return v >= ref / f && v <= ref * f; }

double band(const std::vector<ConvergenceRecord>& rs) {
    double lo = INFINITY;
    double hi = 0.0;
    for (const auto& r : rs) {
        lo = std::min(lo, *r.kappa_h2);
        hi = std::max(hi, *r.kappa_h2);
    }
    return hi / lo;
}

StudyConfig config(Scheme s, const std::vector<std::size_t>& sizes, const char* deg, bool cond) {
    StudyConfig c;
    c.scheme = s;
    c.sizes = sizes;
    c.degeneration = Degeneration::parse(deg);
    c.estimate_conditioning = cond;
    c.record_wall_time = false;
    return c;
}

StudyResult run_checked(const StudyConfig& c, Outcome& o) {
    StudyResult r = run_study(c);
    o.check(r.failures.empty(), "mesh validation");
    o.check(r.records.size() == c.sizes.size(), "record count");
    return r;
}

// (a) eigen estimators vs the dense oracle
bool oracle_eigen(std::ostringstream& msg) {
    double worst = 0.0;
    const char* degs[] = {"none", "count:3:4", "dense"};
    const std::size_t sizes[] = {8, 12, 9};
    for (Scheme s : {Scheme::standard, Scheme::stabilized}) {
        for (int k = 0; k < 3; ++k) {
            const auto dm = build_study_mesh(sizes[k], Degeneration::parse(degs[k]), EpsilonRule{});
            const auto sys = apply_dirichlet(assemble_scheme(s, dm.mesh, dm.patches),
                                             DenseVector(dm.mesh.num_vertices(), 0.0), dm.mesh);
            const auto ev = oracle::jacobi_eigenvalues(sys.matrix);
            const SpectralEstimate e = condition_estimate(sys.matrix);
            if (!e.converged()) return false;
            worst = std::max({worst, std::abs(e.lambda_max / ev.back() - 1), std::abs(e.lambda_min / ev.front() - 1)});
        }
    }
    msg << " eig=" << fmt(worst);
    return worst <= 1e-6;
}

// (b) local matrices of the unit right triangle
bool oracle_local() {
    const std::array<Point2, 3> t{Point2{0, 0}, Point2{1, 0}, Point2{0, 1}};
    const double ks[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
    const auto k = local_stiffness(t);
    const auto m = local_mass(t);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            if (std::abs(k[a][b] - ks[a][b]) > 1e-15) return false;
            if (std::abs(m[a][b] - (a == b ? 1.0 / 12 : 1.0 / 24)) > 1e-16) return false;
        }
    }
    return true;
}

// (c) monomial exactness of every rule
bool oracle_quadrature() {
    const std::array<Point2, 3> t{Point2{0, 0}, Point2{1, 0}, Point2{0, 1}};
    for (int d : {1, 2, 4, 5}) {
        const auto rule = quadrature_rule(d);
        for (int a = 0; a <= d; ++a) {
            for (int b = 0; a + b <= d; ++b) {
                const double exact = std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
                const double got = integrate_on_triangle(t, [&](Point2 x) { return std::pow(x.x, a) * std::pow(x.y, b); }, rule);
                if (std::abs(got - exact) > 1e-13) return false;
            }
        }
    }
    return true;
}

// (d) E idempotent and affine-reproducing
bool oracle_extension() {
    for (std::size_t n : kLadder) {
        const auto dm = build_study_mesh(n, Degeneration::parse(kTen), EpsilonRule{});
        const auto e = extension_operator(dm.mesh, dm.patches);
        if (max_abs_difference(multiply(e.matrix, e.matrix), e.matrix) > 1e-13) return false;
        DenseVector g(dm.mesh.num_vertices());
        for (Index v = 0; v < g.size(); ++v) g[v] = 3 * dm.mesh.vertex(v).x - 2 * dm.mesh.vertex(v).y + 1;
        const DenseVector eg = e.apply(g);
        for (Index v = 0; v < g.size(); ++v) {
            if (std::abs(eg[v] - g[v]) > 1e-12) return false;
        }
    }
    return true;
}

// (e) penalty coefficient vs the squared-distance integral over the sliver
bool oracle_penalty(std::ostringstream& msg) {
    double worst = 0.0;
    const auto rule = quadrature_rule(2);
    for (std::size_t n : kLadder) {
        const auto dm = build_study_mesh(n, Degeneration::parse(kTen), EpsilonRule{});
        for (const auto& p : dm.patches) {
            const Point2 a = dm.mesh.vertex(p.facet_vertices[0]);
            const Point2 b = dm.mesh.vertex(p.facet_vertices[1]);
            const double integral = integrate_on_cell(
                dm.mesh, p.deg_cell,
                [&](Point2 x) {
                    const double d = distance_to_line(x, a, b);
                    return d * d;
                },
                rule);
            const double closed = patch_coefficients(dm.mesh, p).penalty_coef * p.diameter * p.diameter;
            worst = std::max(worst, std::abs(closed - integral));
        }
    }
    msg << " penalty=" << fmt(worst);
    return worst <= 1e-12;
}

// (f) pristine meshes: both stabilized forms equal the standard matrix
bool oracle_pristine() {
    for (std::size_t n : {8u, 16u, 27u}) {
        const Mesh m = build_uniform_unit_square_mesh(n);
        const CsrMatrix a = assemble_stiffness(m);
        if (max_abs_difference(a, assemble_stabilized_jump_form(m, {})) != 0.0) return false;
        if (max_abs_difference(a, assemble_stabilized_operator_form(m, {})) != 0.0) return false;
    }
    return true;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget;  // seconds
        std::function<void(Outcome&)> body;
    };
    const std::vector<Criterion> criteria{
        {1, "standard scheme rates on damaged meshes", 60,
         [](Outcome& o) {
             const auto r = run_checked(config(Scheme::standard, kLadder, kTen, false), o);
             const double l2 = column_rates(r.records, "l2_err").least_squares;
             const double h1 = column_rates(r.records, "h1_err").least_squares;
             o.detail << "L2 slope=" << fmt(l2) << " H1 slope=" << fmt(h1);
             o.check(within(l2, 1.85, 2.15), "L2 slope in [1.85, 2.15]");
             o.check(within(h1, 0.9, 1.1), "H1 slope in [0.9, 1.1]");
         }},
        {2, "standard scheme ill-conditioning", 60,
         [](Outcome& o) {
             const auto r = run_checked(config(Scheme::standard, kLadder, kTen, true), o);
             const double slope = column_rates(r.records, "kappa").least_squares;
             const double k16 = *r.records.front().kappa_h2;
             o.detail << "log kappa slope=" << fmt(slope) << " kappa*h^2(1/16)=" << fmt(k16);
             o.check(slope <= -2.7, "slope <= -2.7");
             o.check(within_factor(k16, 1.53, 3.0), "kappa*h^2 within x3 of 1.53");
         }},
        {3, "stabilized scheme conditioning", 60,
         [](Outcome& o) {
             const auto r = run_checked(config(Scheme::stabilized, kLadder, kTen, true), o);
             const double spread = band(r.records);
             o.detail << "kappa*h^2 in [";
             for (const auto& rec : r.records) o.detail << fmt(*rec.kappa_h2) << (rec.n == kLadder.back() ? "" : ", ");
             o.detail << "] spread=" << fmt(spread);
             o.check(spread < 2.0, "band within factor 2");
             bool near = true;
             for (const auto& rec : r.records) near &= within_factor(*rec.kappa_h2, 0.42, 2.0);
             o.check(near, "within x2 of 0.42");
         }},
        {4, "stabilized scheme accuracy", 90,
         [](Outcome& o) {
             const auto r = run_checked(config(Scheme::stabilized, kLadder, kTen, false), o);
             const double l2 = column_rates(r.records, "l2_err").least_squares;
             const double post = column_rates(r.records, "h1_err_post").least_squares;
             const double raw = column_rates(r.records, "h1_err").least_squares;
             o.detail << "L2 slope=" << fmt(l2) << " post H1 slope=" << fmt(post) << " raw H1 slope=" << fmt(raw);
             o.check(within(l2, 1.85, 2.15), "L2 slope in [1.85, 2.15]");
             o.check(within(post, 0.9, 1.1), "post-processed H1 slope in [0.9, 1.1]");
             o.check(raw <= 0.75, "raw H1 slope <= 0.75");
             for (const auto& rec : r.records) o.check(*rec.h1_err_post <= rec.h1_err + 1e-12, "post <= raw");
         }},
        {5, "operator form equals jump form", 60,
         [](Outcome& o) {
             double worst = 0.0;
             for (std::size_t n : kLadder) {
                 const auto dm = build_study_mesh(n, Degeneration::parse(kTen), EpsilonRule{});
                 const CsrMatrix a = assemble_stabilized_operator_form(dm.mesh, dm.patches);
                 const CsrMatrix b = assemble_stabilized_jump_form(dm.mesh, dm.patches);
                 worst = std::max(worst, max_abs_difference(a, b) / std::max(a.max_abs(), b.max_abs()));
             }
             o.detail << "max relative difference=" << fmt(worst);
             o.check(worst <= 1e-10, "<= 1e-10");
         }},
        {6, "dense packing dichotomy", 120,
         [](Outcome& o) {
             const auto s = run_checked(config(Scheme::standard, kDense, "dense", false), o);
             const auto t = run_checked(config(Scheme::stabilized, kDense, "dense", false), o);
             const double slope = column_rates(s.records, "l2_err").least_squares;
             const double a = t.records[t.records.size() - 2].l2_err;
             const double b = t.records.back().l2_err;
             const double change = std::abs(a - b) / std::max(a, b);
             o.detail << "standard L2 slope=" << fmt(slope) << " stabilized L2 " << fmt(a) << " -> " << fmt(b)
                      << " (change " << fmt(100 * change) << "%)";
             o.check(within(slope, 1.85, 2.15), "standard L2 slope in [1.85, 2.15]");
             o.check(change < 0.10, "stagnation < 10%");
             o.check(within_factor(b, 4.7e-3, 3.0), "plateau within x3 of 4.7e-3");
         }},
        {7, "oracle suites", 60,
         [](Outcome& o) {
             o.check(oracle_eigen(o.detail), "(a) eigen vs dense");
             o.check(oracle_local(), "(b) local matrices");
             o.check(oracle_quadrature(), "(c) quadrature exactness");
             o.check(oracle_extension(), "(d) extension operator");
             o.check(oracle_penalty(o.detail), "(e) penalty coefficient");
             o.check(oracle_pristine(), "(f) pristine forms");
         }},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.body(o);
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        o.check(seconds < c.budget, "runtime under " + fmt(c.budget) + " s");
        if (!o.pass) ++failed;
        std::printf("%s criterion %d (%s): %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.str().c_str(), seconds);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
