#include "dmfem/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "dmfem/errors.hpp"

namespace dmfem {

ExactSolution manufactured_problem() {
    using std::numbers::pi;
    ExactSolution p;
    p.u = [](Point2 x) { return std::sin(pi * x.x) * std::sin(pi * x.y); };
    p.grad_u = [](Point2 x) {
        return Point2{pi * std::cos(pi * x.x) * std::sin(pi * x.y), pi * std::sin(pi * x.x) * std::cos(pi * x.y)};
    };
    p.f = [](Point2 x) { return 2.0 * pi * pi * std::sin(pi * x.x) * std::sin(pi * x.y); };
    p.h2_seminorm = pi * pi;
    return p;
}

double l2_error(const Mesh& mesh, const CellValue& field, const ScalarField& exact, const QuadratureRule& rule) {
    double sum = 0.0;
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const auto p = mesh.cell_points(c);
        const double area = mesh.cell_area(c);
        double cell = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2 x = push_forward(p, rule.points[q]);
            const double e = exact(x) - field(c, x);
            cell += rule.weights[q] * e * e;
        }
        sum += area * cell;
    }
    return std::sqrt(sum);
}

double l2_error(const Mesh& mesh, const PiecewiseLinearField& field, const ExactSolution& exact) {
    if (field.size() != mesh.num_cells()) throw InvalidArgument("field does not match the mesh");
    return l2_error(mesh, [&](Index c, Point2 x) { return field.value(c, x); }, exact.u);
}

double h1_seminorm_error(const Mesh& mesh, const CellGradient& field, const VectorField& exact_grad,
                         std::span<const Index> cells, const QuadratureRule& rule) {
    auto cell_error = [&](Index c) {
        const auto p = mesh.cell_points(c);
        double cell = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2 x = push_forward(p, rule.points[q]);
            const Point2 e = exact_grad(x) - field(c, x);
            cell += rule.weights[q] * dot(e, e);
        }
        return mesh.cell_area(c) * cell;
    };
    double sum = 0.0;
    if (cells.empty()) {
        for (Index c = 0; c < mesh.num_cells(); ++c) sum += cell_error(c);
    } else {
        for (Index c : cells) sum += cell_error(c);
    }
    return std::sqrt(sum);
}

double h1_seminorm_error(const Mesh& mesh, const PiecewiseLinearField& field, const ExactSolution& exact,
                         std::span<const Index> cells) {
    if (field.size() != mesh.num_cells()) throw InvalidArgument("field does not match the mesh");
    return h1_seminorm_error(mesh, [&](Index c, Point2) { return field.gradient(c); }, exact.grad_u, cells);
}

RateFit convergence_rates(std::span<const double> h, std::span<const double> errors) {
    if (h.size() != errors.size() || h.size() < 2) {
        throw InvalidArgument("rates need at least two (h, error) pairs");
    }
    for (std::size_t k = 0; k + 1 < h.size(); ++k) {
        if (!(h[k + 1] < h[k])) throw InvalidArgument("mesh sizes must be strictly decreasing");
    }
    RateFit fit;
    fit.defined = true;
    for (double e : errors) fit.defined &= e > 0.0 && std::isfinite(e);
    if (!fit.defined) {
        fit.least_squares = std::numeric_limits<double>::quiet_NaN();
        fit.pairwise.assign(h.size() - 1, std::numeric_limits<double>::quiet_NaN());
        return fit;
    }
    for (std::size_t k = 0; k + 1 < h.size(); ++k) {
        fit.pairwise.push_back(std::log(errors[k] / errors[k + 1]) / std::log(h[k] / h[k + 1]));
    }
    double mx = 0.0;
    double my = 0.0;
    const double m = static_cast<double>(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
        mx += std::log(h[k]);
        my += std::log(errors[k]);
    }
    mx /= m;
    my /= m;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double dx = std::log(h[k]) - mx;
        sxy += dx * (std::log(errors[k]) - my);
        sxx += dx * dx;
    }
    fit.least_squares = sxy / sxx;
    return fit;
}

}  // namespace dmfem
