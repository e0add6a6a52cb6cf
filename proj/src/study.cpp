#include "dmfem/study.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "dmfem/assembly.hpp"
#include "dmfem/errors.hpp"
#include "dmfem/field.hpp"
#include "dmfem/format.hpp"
#include "dmfem/report.hpp"
#include "dmfem/solver.hpp"
#include "dmfem/stabilized.hpp"

namespace dmfem {

namespace {

template <typename T>
T parse_number(std::string_view text, const char* what) {
    T value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw InvalidArgument(std::string("cannot parse ") + what + " from '" + std::string(text) + "'");
    }
    return value;
}

struct EntryOutcome {
    ConvergenceRecord record;
    double form_mismatch = 0.0;
};

EntryOutcome run_entry(const StudyConfig& config, std::size_t n, const ExactSolution& exact) {
    const auto start = std::chrono::steady_clock::now();
    const DegeneratedMesh dm = build_study_mesh(n, config.degeneration, config.epsilon);
    const Mesh& mesh = dm.mesh;

    const ValidationReport report =
        validate_assumptions(mesh, dm.patches, config.c0, config.max_extended_cells);
    if (!report.passed) {
        throw ValidationError("n=" + std::to_string(n) + ": " + report.summary());
    }

    EntryOutcome out;
    const CsrMatrix a = assemble_scheme(config.scheme, mesh, dm.patches);
    if (config.cross_check_forms && config.scheme == Scheme::stabilized) {
        const CsrMatrix op = assemble_stabilized_operator_form(mesh, dm.patches);
        out.form_mismatch = max_abs_difference(a, op) / std::max(a.max_abs(), op.max_abs());
    }
    const DenseVector load = assemble_load(mesh, exact.f);
    const ReducedSystem sys = apply_dirichlet(a, load, mesh);

    SolveResult sol;
    if (config.solver == SolverKind::cholesky) {
        sol = cholesky_solve(sys.matrix, sys.rhs);
    } else {
        sol = cg_solve(sys.matrix, sys.rhs);
        if (!sol.report.converged) {
            throw SolverError("n=" + std::to_string(n) + ": CG stopped after " +
                              std::to_string(sol.report.iterations) + " iterations at relative residual " +
                              format_double(sol.report.relative_residual));
        }
    }
    const DenseVector nodal = sys.dofs.extend_vector(sol.x);
    const PiecewiseLinearField uh = PiecewiseLinearField::from_nodal(mesh, nodal);

    ConvergenceRecord& r = out.record;
    r.n = n;
    r.h = 1.0 / static_cast<double>(n);
    r.ndof = sys.dofs.num_reduced();
    r.l2_err = l2_error(mesh, uh, exact);
    r.h1_err = h1_seminorm_error(mesh, uh, exact);
    if (config.scheme == Scheme::stabilized) {
        const PiecewiseLinearField post = postprocess_extend(mesh, nodal, dm.patches);
        r.h1_err_post = h1_seminorm_error(mesh, post, exact);
    }
    if (config.estimate_conditioning && n <= config.max_conditioning_n) {
        const SpectralEstimate est = condition_estimate(sys.matrix);
        if (!est.converged()) {
            throw SolverError("n=" + std::to_string(n) + ": eigenvalue estimate did not converge");
        }
        r.kappa = est.kappa;
        r.kappa_h2 = est.kappa * r.h * r.h;
    }
    if (config.record_wall_time) {
        r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return out;
}

}  // namespace

Scheme parse_scheme(std::string_view text) {
    if (text == "standard") return Scheme::standard;
    if (text == "stabilized") return Scheme::stabilized;
    throw InvalidArgument("unknown scheme '" + std::string(text) + "' (standard|stabilized)");
}

SolverKind parse_solver(std::string_view text) {
    if (text == "chol") return SolverKind::cholesky;
    if (text == "cg") return SolverKind::cg;
    throw InvalidArgument("unknown solver '" + std::string(text) + "' (chol|cg)");
}

std::string to_string(Scheme s) { return s == Scheme::standard ? "standard" : "stabilized"; }
std::string to_string(SolverKind s) { return s == SolverKind::cholesky ? "chol" : "cg"; }

Degeneration Degeneration::parse(std::string_view text) {
    Degeneration d;
    if (text == "none") return d;
    if (text == "dense") {
        d.mode = Mode::dense;
        return d;
    }
    if (text.starts_with("count:")) {
        const std::string_view rest = text.substr(6);
        const auto colon = rest.find(':');
        if (colon == std::string_view::npos) {
            throw InvalidArgument("degeneration must be count:K:seed, got '" + std::string(text) + "'");
        }
        d.mode = Mode::count;
        d.count = parse_number<std::size_t>(rest.substr(0, colon), "count");
        d.seed = parse_number<std::uint64_t>(rest.substr(colon + 1), "seed");
        return d;
    }
    throw InvalidArgument("unknown degeneration '" + std::string(text) + "' (none|dense|count:K:seed)");
}

std::string Degeneration::to_string() const {
    switch (mode) {
        case Mode::none: return "none";
        case Mode::dense: return "dense";
        case Mode::count: break;
    }
    return "count:" + std::to_string(count) + ":" + std::to_string(seed);
}

EpsilonRule EpsilonRule::parse(std::string_view text) {
    EpsilonRule e;
    if (text == "h2") return e;
    if (text.starts_with("fixed:")) {
        e.kind = Kind::fixed;
        e.value = parse_number<double>(text.substr(6), "epsilon");
        if (!(e.value > 0.0) || !std::isfinite(e.value)) throw InvalidArgument("fixed epsilon must be positive");
        return e;
    }
    throw InvalidArgument("unknown epsilon rule '" + std::string(text) + "' (h2|fixed:<v>)");
}

double EpsilonRule::epsilon(std::size_t n) const {
    if (kind == Kind::fixed) return value;
    const double h = 1.0 / static_cast<double>(n);
    return h * h;
}

std::string EpsilonRule::to_string() const { return kind == Kind::h_squared ? "h2" : "fixed:" + format_double(value); }

void StudyConfig::validate() const {
    if (sizes.empty()) throw InvalidArgument("study needs at least one mesh size");
    for (std::size_t n : sizes) {
        if (n < 1) throw InvalidArgument("mesh size must be positive");
        if (degeneration.mode != Degeneration::Mode::none && n < 3) {
            throw InvalidArgument("degeneration needs n >= 3");
        }
        if (degeneration.mode == Degeneration::Mode::dense && n % 3 != 0) {
            throw InvalidArgument("dense degeneration needs n divisible by 3, got " + std::to_string(n));
        }
    }
    auto sorted = sizes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidArgument("duplicate mesh size in study");
    }
    if (epsilon.kind == EpsilonRule::Kind::fixed && !(epsilon.value > 0.0)) {
        throw InvalidArgument("fixed epsilon must be positive");
    }
    if (threads == 0) throw InvalidArgument("threads must be >= 1");
}

DegeneratedMesh build_study_mesh(std::size_t n, const Degeneration& degeneration, const EpsilonRule& epsilon) {
    Mesh mesh = build_uniform_unit_square_mesh(n);
    switch (degeneration.mode) {
        case Degeneration::Mode::none: return {std::move(mesh), {}};
        case Degeneration::Mode::dense: {
            const auto squares = dense_degenerate_pattern(n);
            return degenerate_squares(mesh, squares, epsilon.epsilon(n));
        }
        case Degeneration::Mode::count: break;
    }
    const auto squares = select_degenerate_squares(n, degeneration.count, degeneration.seed);
    return degenerate_squares(mesh, squares, epsilon.epsilon(n));
}

CsrMatrix assemble_scheme(Scheme scheme, const Mesh& mesh, std::span<const Patch> patches) {
    if (scheme == Scheme::standard) return assemble_stiffness(mesh);
    return assemble_stabilized_jump_form(mesh, patches);
}

ConvergenceRecord run_single(const StudyConfig& config, std::size_t n, const ExactSolution& exact) {
    return run_entry(config, n, exact).record;
}

StudyResult run_study(const StudyConfig& config) {
    config.validate();
    auto sizes = config.sizes;
    std::sort(sizes.begin(), sizes.end());
    const ExactSolution exact = manufactured_problem();

    std::vector<std::optional<EntryOutcome>> outcomes(sizes.size());
    std::vector<std::string> diagnostics(sizes.size());
    std::vector<std::exception_ptr> errors(sizes.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < sizes.size(); k = next++) {
            try {
                outcomes[k] = run_entry(config, sizes[k], exact);
            } catch (const ValidationError& e) {
                diagnostics[k] = e.what();
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const unsigned workers = std::min<std::size_t>(config.threads, sizes.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    StudyResult result;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        if (outcomes[k]) {
            result.records.push_back(outcomes[k]->record);
            result.max_form_mismatch = std::max(result.max_form_mismatch, outcomes[k]->form_mismatch);
        } else {
            result.failures.push_back({sizes[k], diagnostics[k]});
        }
    }
    if (!result.records.empty()) {
        if (!config.csv_path.empty()) emit_csv(result.records, config.csv_path);
        if (!config.svg_path.empty()) {
            std::vector<std::string> columns{"l2_err", "h1_err"};
            if (config.scheme == Scheme::stabilized) columns.push_back("h1_err_post");
            emit_svg_plot(result.records, columns, config.svg_path);
        }
    }
    return result;
}

std::optional<double> column_value(const ConvergenceRecord& r, std::string_view column) {
    if (column == "l2_err") return r.l2_err;
    if (column == "h1_err") return r.h1_err;
    if (column == "h1_err_post") return r.h1_err_post;
    if (column == "kappa") return r.kappa;
    if (column == "kappa_h2") return r.kappa_h2;
    if (column == "wall_time") return r.wall_time;
    throw InvalidArgument("unknown column '" + std::string(column) + "'");
}

RateFit column_rates(const std::vector<ConvergenceRecord>& records, std::string_view column) {
    std::vector<double> h;
    std::vector<double> e;
    for (const auto& r : records) {
        if (const auto v = column_value(r, column)) {
            h.push_back(r.h);
            e.push_back(*v);
        }
    }
    return convergence_rates(h, e);
}

}  // namespace dmfem
