#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmfem/analysis.hpp"
#include "dmfem/mesh.hpp"
#include "dmfem/sparse.hpp"

namespace dmfem {

enum class Scheme { standard, stabilized };
enum class SolverKind { cholesky, cg };

Scheme parse_scheme(std::string_view text);
SolverKind parse_solver(std::string_view text);
std::string to_string(Scheme s);
std::string to_string(SolverKind s);

struct Degeneration {
    enum class Mode { none, count, dense };
    Mode mode = Mode::none;
    std::size_t count = 0;
    std::uint64_t seed = 0;

    /// "none", "dense" or "count:K:seed".
    static Degeneration parse(std::string_view text);
    std::string to_string() const;
};

struct EpsilonRule {
    enum class Kind { h_squared, fixed };
    Kind kind = Kind::h_squared;
    double value = 0.0;

    /// "h2" or "fixed:<v>".
    static EpsilonRule parse(std::string_view text);
    double epsilon(std::size_t n) const;
    std::string to_string() const;
};

inline const std::vector<std::size_t> kSparseLadder{16, 27, 44, 73, 121, 200};
inline const std::vector<std::size_t> kDenseLadder{9, 18, 36, 63, 108, 180};

struct StudyConfig {
    Scheme scheme = Scheme::standard;
    std::vector<std::size_t> sizes = kSparseLadder;
    Degeneration degeneration;
    EpsilonRule epsilon;
    SolverKind solver = SolverKind::cholesky;
    bool estimate_conditioning = true;
    std::size_t max_conditioning_n = 200;
    bool record_wall_time = true;  // off for byte-reproducible CSV
    bool cross_check_forms = false;  // compare operator and jump assembly per mesh
    double c0 = kDefaultC0;
    std::size_t max_extended_cells = kDefaultMaxExtendedCells;
    unsigned threads = 1;
    std::string csv_path;
    std::string svg_path;

    /// Throws InvalidArgument on inconsistent settings.
    void validate() const;
};

struct ConvergenceRecord {
    std::size_t n = 0;
    double h = 0.0;
    std::size_t ndof = 0;
    double l2_err = 0.0;
    double h1_err = 0.0;
    std::optional<double> h1_err_post;
    std::optional<double> kappa;
    std::optional<double> kappa_h2;
    std::optional<double> wall_time;  // seconds

    friend bool operator==(const ConvergenceRecord&, const ConvergenceRecord&) = default;
};

DegeneratedMesh build_study_mesh(std::size_t n, const Degeneration& degeneration, const EpsilonRule& epsilon);

/// Full (boundary rows included) system matrix of a scheme.
CsrMatrix assemble_scheme(Scheme scheme, const Mesh& mesh, std::span<const Patch> patches);

/// One ladder entry. Throws ValidationError when the mesh violates the
/// patch assumptions.
ConvergenceRecord run_single(const StudyConfig& config, std::size_t n,
                             const ExactSolution& exact = manufactured_problem());

struct StudyFailure {
    std::size_t n = 0;
    std::string diagnostic;
};

struct StudyResult {
    std::vector<ConvergenceRecord> records;  // ascending n
    std::vector<StudyFailure> failures;
    double max_form_mismatch = 0.0;  // only with cross_check_forms
};

/// Runs every size, then writes csv_path / svg_path when set.
StudyResult run_study(const StudyConfig& config);

/// Rates of one column ("l2_err", "h1_err", "h1_err_post", "kappa",
/// "kappa_h2") over the records that carry it.
RateFit column_rates(const std::vector<ConvergenceRecord>& records, std::string_view column);
std::optional<double> column_value(const ConvergenceRecord& r, std::string_view column);

}  // namespace dmfem
