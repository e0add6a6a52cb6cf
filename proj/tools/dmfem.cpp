// dmfem: meshes, solves, conditioning and convergence studies from the shell.
//
// exit status: 0 success, 2 assumption-validation failure, 1 anything else

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "dmfem/assembly.hpp"
#include "dmfem/errors.hpp"
#include "dmfem/format.hpp"
#include "dmfem/mesh_io.hpp"
#include "dmfem/report.hpp"
#include "dmfem/solver.hpp"
#include "dmfem/study.hpp"

using namespace dmfem;

namespace {

constexpr int kValidationFailed = 2;
constexpr int kError = 1;

struct Common {
    std::size_t n = 16;
    std::string scheme = "standard";
    std::string degenerate = "none";
    std::string epsilon = "h2";
    std::string solver = "chol";
    std::uint64_t seed = 1;
    bool seed_given = false;
    double c0 = kDefaultC0;
    std::size_t max_extended = kDefaultMaxExtendedCells;
};

// "count:K" takes --seed; an explicit --seed overrides "count:K:S".
Degeneration degeneration_of(const Common& c) {
    Degeneration d;
    const std::string& text = c.degenerate;
    if (text.starts_with("count:") && text.find(':', 6) == std::string::npos) {
        d = Degeneration::parse(text + ":" + std::to_string(c.seed));
    } else {
        d = Degeneration::parse(text);
    }
    if (c.seed_given && d.mode == Degeneration::Mode::count) d.seed = c.seed;
    return d;
}

StudyConfig config_of(const Common& c) {
    StudyConfig cfg;
    cfg.scheme = parse_scheme(c.scheme);
    cfg.degeneration = degeneration_of(c);
    cfg.epsilon = EpsilonRule::parse(c.epsilon);
    cfg.solver = parse_solver(c.solver);
    cfg.c0 = c.c0;
    cfg.max_extended_cells = c.max_extended;
    cfg.sizes = {c.n};
    return cfg;
}

void add_common(CLI::App* cmd, Common& c, bool with_n) {
    if (with_n) cmd->add_option("--n", c.n, "grid squares per side")->check(CLI::PositiveNumber);
    cmd->add_option("--scheme", c.scheme, "standard | stabilized")
        ->check(CLI::IsMember({"standard", "stabilized"}));
    cmd->add_option("--degenerate", c.degenerate, "none | dense | count:K[:seed]");
    cmd->add_option("--epsilon-rule", c.epsilon, "h2 | fixed:<v>");
    cmd->add_option("--solver", c.solver, "chol | cg")->check(CLI::IsMember({"chol", "cg"}));
    cmd->add_option("--seed", c.seed, "placement seed for count:K");
    cmd->add_option("--c0", c.c0, "quality threshold for degenerate cells");
    cmd->add_option("--max-extended", c.max_extended, "bound M on extended-patch cells");
}

void print_record(const ConvergenceRecord& r) { write_csv(std::cout, {r}); }

int run_mesh(const Common& c, const std::string& input, const std::string& out, const std::string& matrix,
             bool validate) {
    DegeneratedMesh dm = input.empty() ? build_study_mesh(c.n, degeneration_of(c), EpsilonRule::parse(c.epsilon))
                                       : read_mesh(input);
    std::cout << "vertices " << dm.mesh.num_vertices() << ", cells " << dm.mesh.num_cells() << ", patches "
              << dm.patches.size() << ", h " << format_double(dm.mesh.h()) << '\n';
    if (!out.empty()) write_mesh(out, dm.mesh, dm.patches);
    if (!matrix.empty()) {
        const CsrMatrix a = assemble_scheme(parse_scheme(c.scheme), dm.mesh, dm.patches);
        const ReducedSystem sys = apply_dirichlet(a, DenseVector(dm.mesh.num_vertices(), 0.0), dm.mesh);
        write_coordinate(matrix, sys.matrix);
    }
    if (validate) {
        const ValidationReport report = validate_assumptions(dm.mesh, dm.patches, c.c0, c.max_extended);
        std::cout << report.summary() << '\n';
        if (!report.passed) return kValidationFailed;
    }
    return 0;
}

int run_solve(const Common& c, bool with_cond, bool timing, const std::string& csv) {
    StudyConfig cfg = config_of(c);
    cfg.estimate_conditioning = with_cond;
    cfg.max_conditioning_n = c.n;
    cfg.record_wall_time = timing;
    cfg.validate();
    const ConvergenceRecord r = run_single(cfg, c.n);
    print_record(r);
    if (!csv.empty()) emit_csv({r}, csv);
    return 0;
}

int run_cond(const Common& c) {
    const StudyConfig cfg = config_of(c);
    cfg.validate();
    const DegeneratedMesh dm = build_study_mesh(c.n, cfg.degeneration, cfg.epsilon);
    const ValidationReport report = validate_assumptions(dm.mesh, dm.patches, cfg.c0, cfg.max_extended_cells);
    if (!report.passed) {
        std::cerr << report.summary() << '\n';
        return kValidationFailed;
    }
    const CsrMatrix a = assemble_scheme(cfg.scheme, dm.mesh, dm.patches);
    const ReducedSystem sys = apply_dirichlet(a, DenseVector(dm.mesh.num_vertices(), 0.0), dm.mesh);
    const SpectralEstimate e = condition_estimate(sys.matrix);
    const double h = 1.0 / static_cast<double>(c.n);
    std::cout << "n " << c.n << "\nndof " << sys.matrix.rows() << "\nlambda_max " << format_double(e.lambda_max)
              << "\nlambda_min " << format_double(e.lambda_min) << "\nkappa " << format_double(e.kappa)
              << "\nkappa_h2 " << format_double(e.kappa * h * h) << "\nlanczos_iterations " << e.lanczos_iterations
              << "\ninverse_iterations " << e.inverse_iterations << '\n';
    if (!e.converged()) {
        std::cerr << "eigenvalue estimate did not converge\n";
        return kError;
    }
    return 0;
}

int run_study_command(const Common& c, std::vector<std::size_t> sizes, bool no_cond, std::size_t max_cond_n,
                      bool timing, unsigned threads, bool cross_check, const std::string& csv,
                      const std::string& svg) {
    StudyConfig cfg = config_of(c);
    if (sizes.empty()) sizes = cfg.degeneration.mode == Degeneration::Mode::dense ? kDenseLadder : kSparseLadder;
    cfg.sizes = sizes;
    cfg.estimate_conditioning = !no_cond;
    cfg.max_conditioning_n = max_cond_n;
    cfg.record_wall_time = timing;
    cfg.threads = threads;
    cfg.cross_check_forms = cross_check;
    cfg.csv_path = csv;
    cfg.svg_path = svg;
    const StudyResult r = run_study(cfg);
    if (!r.records.empty()) {
        write_csv(std::cout, r.records);
        if (r.records.size() >= 2) {
            for (const char* col : {"l2_err", "h1_err", "h1_err_post", "kappa"}) {
                std::vector<ConvergenceRecord> have;
                for (const auto& rec : r.records) {
                    if (column_value(rec, col)) have.push_back(rec);
                }
                if (have.size() < 2) continue;
                const RateFit fit = column_rates(have, col);
                std::cout << "# slope " << col << ' ' << (fit.defined ? format_double(fit.least_squares) : "undefined")
                          << '\n';
            }
        }
        if (cross_check) std::cout << "# form mismatch " << format_double(r.max_form_mismatch) << '\n';
    }
    for (const auto& f : r.failures) std::cerr << "validation failed: " << f.diagnostic << '\n';
    return r.failures.empty() ? 0 : kValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poisson P1 solver for meshes with sliver cells: standard and stabilized schemes"};
    app.require_subcommand(1);

    Common mesh_opts;
    std::string mesh_in, mesh_out, matrix_out;
    bool validate = false;
    auto* mesh = app.add_subcommand("mesh", "generate, export and validate a mesh");
    add_common(mesh, mesh_opts, true);
    mesh->add_option("--input", mesh_in, "read a mesh file instead of generating");
    mesh->add_option("--out", mesh_out, "write the mesh file");
    mesh->add_option("--matrix", matrix_out, "write the reduced system matrix of --scheme as 'i j value' lines");
    mesh->add_flag("--validate", validate, "check the patch assumptions (exit 2 on failure)");

    Common solve_opts;
    bool solve_cond = false;
    bool solve_no_timing = false;
    std::string solve_csv;
    auto* solve = app.add_subcommand("solve", "solve once and print the record");
    add_common(solve, solve_opts, true);
    solve->add_flag("--cond", solve_cond, "also estimate the condition number");
    solve->add_flag("--no-timing", solve_no_timing, "leave wall_time empty");
    solve->add_option("--csv", solve_csv, "write the record as CSV");

    Common cond_opts;
    auto* cond = app.add_subcommand("cond", "spectral condition number of the reduced matrix");
    add_common(cond, cond_opts, true);

    Common study_opts;
    std::vector<std::size_t> sizes;
    bool no_cond = false;
    std::size_t max_cond_n = 200;
    bool no_timing = false;
    unsigned threads = 1;
    bool cross_check = false;
    std::string csv, svg;
    auto* study = app.add_subcommand("study", "convergence study over a ladder of meshes");
    add_common(study, study_opts, false);
    study->add_option("--n", sizes, "mesh sizes (default ladder for the degeneration mode)")->delimiter(',');
    study->add_flag("--no-cond", no_cond, "skip conditioning");
    study->add_option("--max-cond-n", max_cond_n, "largest n with conditioning");
    study->add_flag("--no-timing", no_timing, "leave wall_time empty (byte-reproducible CSV)");
    study->add_option("--threads", threads, "ladder entries run in parallel")->check(CLI::PositiveNumber);
    study->add_flag("--cross-check", cross_check, "compare operator and jump assembly on every mesh");
    study->add_option("--csv", csv, "CSV output path");
    study->add_option("--svg", svg, "SVG log-log plot path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kError;
    }

    for (Common* c : {&mesh_opts, &solve_opts, &cond_opts, &study_opts}) c->seed_given = false;
    if (auto* o = mesh->get_option("--seed"); o->count()) mesh_opts.seed_given = true;
    if (auto* o = solve->get_option("--seed"); o->count()) solve_opts.seed_given = true;
    if (auto* o = cond->get_option("--seed"); o->count()) cond_opts.seed_given = true;
    if (auto* o = study->get_option("--seed"); o->count()) study_opts.seed_given = true;

    try {
        if (mesh->parsed()) return run_mesh(mesh_opts, mesh_in, mesh_out, matrix_out, validate);
        if (solve->parsed()) return run_solve(solve_opts, solve_cond, !solve_no_timing, solve_csv);
        if (cond->parsed()) return run_cond(cond_opts);
        if (study->parsed()) {
            return run_study_command(study_opts, sizes, no_cond, max_cond_n, !no_timing, threads, cross_check, csv,
                                     svg);
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation failed: " << e.what() << '\n';
        return kValidationFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kError;
    }
    return kError;
}
