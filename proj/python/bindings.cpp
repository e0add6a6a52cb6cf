#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dmfem/assembly.hpp"
#include "dmfem/errors.hpp"
#include "dmfem/mesh_io.hpp"
#include "dmfem/report.hpp"
#include "dmfem/solver.hpp"
#include "dmfem/study.hpp"

namespace py = pybind11;
using namespace dmfem;

namespace {

py::array_t<double> vertex_array(const Mesh& m) {
    py::array_t<double> out({m.num_vertices(), std::size_t{2}});
    auto a = out.mutable_unchecked<2>();
    for (Index v = 0; v < m.num_vertices(); ++v) {
        a(v, 0) = m.vertex(v).x;
        a(v, 1) = m.vertex(v).y;
    }
    return out;
}

py::array_t<std::int64_t> cell_array(const Mesh& m) {
    py::array_t<std::int64_t> out({m.num_cells(), std::size_t{3}});
    auto a = out.mutable_unchecked<2>();
    for (Index c = 0; c < m.num_cells(); ++c) {
        for (int k = 0; k < 3; ++k) a(c, k) = static_cast<std::int64_t>(m.cells()[c].v[k]);
    }
    return out;
}

// (data, indices, indptr, shape), the argument order of scipy.sparse.csr_matrix
py::tuple csr_tuple(const CsrMatrix& a) {
    auto copy = [](auto span) {
        using T = std::conditional_t<std::is_same_v<typename decltype(span)::value_type, double>, double, std::int64_t>;
        py::array_t<T> out(span.size());
        auto* p = out.mutable_data();
        for (std::size_t k = 0; k < span.size(); ++k) p[k] = static_cast<T>(span[k]);
        return out;
    };
    return py::make_tuple(copy(a.values()), copy(a.col_indices()), copy(a.row_offsets()),
                          py::make_tuple(a.rows(), a.cols()));
}

py::object optional_value(const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); }

py::dict record_dict(const ConvergenceRecord& r) {
    py::dict d;
    d["n"] = r.n;
    d["h"] = r.h;
    d["ndof"] = r.ndof;
    d["l2_err"] = r.l2_err;
    d["h1_err"] = r.h1_err;
    d["h1_err_post"] = optional_value(r.h1_err_post);
    d["kappa"] = optional_value(r.kappa);
    d["kappa_h2"] = optional_value(r.kappa_h2);
    d["wall_time"] = optional_value(r.wall_time);
    return d;
}

StudyConfig make_config(const std::string& scheme, std::vector<std::size_t> sizes, const std::string& degenerate,
                        const std::string& epsilon, const std::string& solver, bool conditioning, bool timing,
                        double c0, std::size_t max_extended) {
    StudyConfig cfg;
    cfg.scheme = parse_scheme(scheme);
    cfg.sizes = std::move(sizes);
    cfg.degeneration = Degeneration::parse(degenerate);
    cfg.epsilon = EpsilonRule::parse(epsilon);
    cfg.solver = parse_solver(solver);
    cfg.estimate_conditioning = conditioning;
    cfg.record_wall_time = timing;
    cfg.c0 = c0;
    cfg.max_extended_cells = max_extended;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "P1 finite elements for Poisson on meshes with sliver cells";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.attr("DEFAULT_C0") = kDefaultC0;
    m.attr("DEFAULT_MAX_EXTENDED_CELLS") = kDefaultMaxExtendedCells;
    m.attr("SPARSE_LADDER") = kSparseLadder;
    m.attr("DENSE_LADDER") = kDenseLadder;

    py::class_<DegeneratedMesh>(m, "Mesh")
        .def_property_readonly("vertices", [](const DegeneratedMesh& d) { return vertex_array(d.mesh); })
        .def_property_readonly("cells", [](const DegeneratedMesh& d) { return cell_array(d.mesh); })
        .def_property_readonly("h", [](const DegeneratedMesh& d) { return d.mesh.h(); })
        .def_property_readonly("n", [](const DegeneratedMesh& d) { return d.mesh.grid_size(); })
        .def_property_readonly("patches",
                               [](const DegeneratedMesh& d) {
                                   py::list out;
                                   for (const Patch& p : d.patches) {
                                       py::dict e;
                                       e["deg_cell"] = p.deg_cell;
                                       e["nd_cell"] = p.nd_cell;
                                       e["facet_vertices"] = p.facet_vertices;
                                       e["extended_cells"] = p.extended_cells;
                                       e["diameter"] = p.diameter;
                                       out.append(e);
                                   }
                                   return out;
                               })
        .def("quality", [](const DegeneratedMesh& d) {
            py::array_t<double> out(d.mesh.num_cells());
            auto* p = out.mutable_data();
            for (Index c = 0; c < d.mesh.num_cells(); ++c) p[c] = cell_quality(d.mesh, c).quality;
            return out;
        })
        .def("detect_degenerate", [](const DegeneratedMesh& d, double c0) { return detect_degenerate_cells(d.mesh, c0); },
             py::arg("c0") = kDefaultC0)
        .def(
            "validate",
            [](const DegeneratedMesh& d, double c0, std::size_t max_extended) {
                const ValidationReport r = validate_assumptions(d.mesh, d.patches, c0, max_extended);
                return py::make_tuple(r.passed, r.summary());
            },
            py::arg("c0") = kDefaultC0, py::arg("max_extended") = kDefaultMaxExtendedCells)
        .def("save", [](const DegeneratedMesh& d, const std::string& path) { write_mesh(path, d.mesh, d.patches); });

    m.def(
        "build_mesh",
        [](std::size_t n, const std::string& degenerate, const std::string& epsilon) {
            return build_study_mesh(n, Degeneration::parse(degenerate), EpsilonRule::parse(epsilon));
        },
        py::arg("n"), py::arg("degenerate") = "none", py::arg("epsilon") = "h2",
        "Uniform n x n mesh; degenerate is 'none', 'dense' or 'count:K:seed'.");
    m.def("load_mesh", [](const std::string& path) { return read_mesh(path); }, py::arg("path"));

    m.def(
        "system_matrix",
        [](const DegeneratedMesh& d, const std::string& scheme, bool reduced) {
            const CsrMatrix a = assemble_scheme(parse_scheme(scheme), d.mesh, d.patches);
            if (!reduced) return csr_tuple(a);
            return csr_tuple(apply_dirichlet(a, DenseVector(d.mesh.num_vertices(), 0.0), d.mesh).matrix);
        },
        py::arg("mesh"), py::arg("scheme") = "standard", py::arg("reduced") = true,
        "CSR arrays (data, indices, indptr, shape).");

    m.def(
        "condition_number",
        [](const DegeneratedMesh& d, const std::string& scheme) {
            const CsrMatrix a = assemble_scheme(parse_scheme(scheme), d.mesh, d.patches);
            const SpectralEstimate e =
                condition_estimate(apply_dirichlet(a, DenseVector(d.mesh.num_vertices(), 0.0), d.mesh).matrix);
            py::dict out;
            out["lambda_max"] = e.lambda_max;
            out["lambda_min"] = e.lambda_min;
            out["kappa"] = e.kappa;
            out["converged"] = e.converged();
            return out;
        },
        py::arg("mesh"), py::arg("scheme") = "standard");

    m.def(
        "solve",
        [](std::size_t n, const std::string& scheme, const std::string& degenerate, const std::string& epsilon,
           const std::string& solver, bool conditioning, double c0, std::size_t max_extended) {
            const StudyConfig cfg =
                make_config(scheme, {n}, degenerate, epsilon, solver, conditioning, false, c0, max_extended);
            cfg.validate();
            ConvergenceRecord r;
            {
                py::gil_scoped_release release;
                StudyConfig c = cfg;
                c.max_conditioning_n = n;
                r = run_single(c, n);
            }
            return record_dict(r);
        },
        py::arg("n"), py::arg("scheme") = "standard", py::arg("degenerate") = "none", py::arg("epsilon") = "h2",
        py::arg("solver") = "chol", py::arg("conditioning") = false, py::arg("c0") = kDefaultC0,
        py::arg("max_extended") = kDefaultMaxExtendedCells);

    m.def(
        "study",
        [](const std::string& scheme, std::vector<std::size_t> sizes, const std::string& degenerate,
           const std::string& epsilon, const std::string& solver, bool conditioning, std::size_t max_conditioning_n,
           unsigned threads, const std::string& csv, const std::string& svg) {
            StudyConfig cfg =
                make_config(scheme, std::move(sizes), degenerate, epsilon, solver, conditioning, false, kDefaultC0,
                            kDefaultMaxExtendedCells);
            cfg.max_conditioning_n = max_conditioning_n;
            cfg.threads = threads;
            cfg.csv_path = csv;
            cfg.svg_path = svg;
            StudyResult r;
            {
                py::gil_scoped_release release;
                r = run_study(cfg);
            }
            py::list records;
            for (const auto& rec : r.records) records.append(record_dict(rec));
            py::list failures;
            for (const auto& f : r.failures) failures.append(py::make_tuple(f.n, f.diagnostic));
            py::dict out;
            out["records"] = records;
            out["failures"] = failures;
            return out;
        },
        py::arg("scheme"), py::arg("sizes"), py::arg("degenerate") = "none", py::arg("epsilon") = "h2",
        py::arg("solver") = "chol", py::arg("conditioning") = true, py::arg("max_conditioning_n") = 200,
        py::arg("threads") = 1, py::arg("csv") = "", py::arg("svg") = "");

    m.def(
        "convergence_rates",
        [](std::vector<double> h, std::vector<double> err) {
            const RateFit f = convergence_rates(h, err);
            py::dict out;
            out["pairwise"] = f.pairwise;
            out["least_squares"] = f.least_squares;
            out["defined"] = f.defined;
            return out;
        },
        py::arg("h"), py::arg("errors"));
}
