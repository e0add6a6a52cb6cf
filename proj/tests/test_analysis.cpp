#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dmfem/analysis.hpp"
#include "dmfem/errors.hpp"
#include "dmfem/report.hpp"
#include "dmfem/study.hpp"

using namespace dmfem;

namespace {

DenseVector interpolant(const Mesh& m, const ScalarField& u) {
    DenseVector v(m.num_vertices());
    for (Index k = 0; k < m.num_vertices(); ++k) v[k] = u(m.vertex(k));
    return v;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
    return n;
}

StudyConfig quiet(Scheme scheme, std::vector<std::size_t> sizes, const char* deg) {
    StudyConfig c;
    c.scheme = scheme;
    c.sizes = std::move(sizes);
    c.degeneration = Degeneration::parse(deg);
    c.record_wall_time = false;
    return c;
}

}  // namespace

TEST(Manufactured, PdeAndBoundary) {
    using std::numbers::pi;
    const ExactSolution p = manufactured_problem();
    EXPECT_DOUBLE_EQ(p.h2_seminorm, pi * pi);
    const double d = 1e-4;
    for (double x : {0.13, 0.5, 0.77}) {
        for (double y : {0.21, 0.64}) {
            const Point2 q{x, y};
            // -Laplace u = 2 pi^2 u exactly; check f against it and the gradient by differences
            EXPECT_NEAR(p.f(q), 2 * pi * pi * p.u(q), 1e-12);
            EXPECT_NEAR(p.grad_u(q).x, (p.u({x + d, y}) - p.u({x - d, y})) / (2 * d), 1e-6);
            EXPECT_NEAR(p.grad_u(q).y, (p.u({x, y + d}) - p.u({x, y - d})) / (2 * d), 1e-6);
            const double lap = (p.u({x + d, y}) + p.u({x - d, y}) + p.u({x, y + d}) + p.u({x, y - d}) - 4 * p.u(q)) / (d * d);
            EXPECT_NEAR(-lap, p.f(q), 1e-5 * p.f(q));
        }
    }
    for (double t : {0.0, 0.3, 1.0}) {
        EXPECT_NEAR(p.u({t, 0}), 0.0, 1e-15);
        EXPECT_NEAR(p.u({0, t}), 0.0, 1e-15);
        EXPECT_NEAR(p.u({t, 1}), 0.0, 1e-15);
        EXPECT_NEAR(p.u({1, t}), 0.0, 1e-15);
    }
}

TEST(Errors, InterpolantWindow) {
    const Mesh m = build_uniform_unit_square_mesh(16);
    const ExactSolution p = manufactured_problem();
    const auto field = PiecewiseLinearField::from_nodal(m, interpolant(m, p.u));
    const double e = l2_error(m, field, p);
    EXPECT_GT(e, 1e-4);
    EXPECT_LT(e, 1e-2);
}

TEST(Errors, ExactFieldGivesZero) {
    const Mesh m = build_uniform_unit_square_mesh(8);
    const ExactSolution p = manufactured_problem();
    EXPECT_NEAR(l2_error(m, [&](Index, Point2 x) { return p.u(x); }, p.u), 0.0, 1e-14);
    EXPECT_NEAR(h1_seminorm_error(m, [&](Index, Point2 x) { return p.grad_u(x); }, p.grad_u), 0.0, 1e-10);
}

TEST(Errors, AffineFieldsAreExact) {
    const Mesh m = build_uniform_unit_square_mesh(5);
    auto g = [](Point2 x) { return 1.0 + 2.0 * x.x - x.y; };
    const auto field = PiecewiseLinearField::from_nodal(m, interpolant(m, g));
    EXPECT_NEAR(l2_error(m, [&](Index c, Point2 x) { return field.value(c, x); }, g), 0.0, 1e-14);
    EXPECT_NEAR(h1_seminorm_error(m, [&](Index c, Point2) { return field.gradient(c); },
                                  [](Point2) { return Point2{2.0, -1.0}; }),
                0.0, 1e-13);
    // subset restricts the sum: error of the zero field on one cell
    const std::vector<Index> one{3};
    const double e = h1_seminorm_error(m, [](Index, Point2) { return Point2{}; }, [](Point2) { return Point2{2.0, -1.0}; },
                                       one);
    EXPECT_NEAR(e * e, 5.0 * m.cell_area(3), 1e-14);
}

TEST(Rates, SyntheticSequences) {
    const std::vector<double> h{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> e2;
    std::vector<double> e1;
    for (double x : h) {
        e2.push_back(3.0 * x * x);
        e1.push_back(0.5 * x);
    }
    const RateFit f2 = convergence_rates(h, e2);
    ASSERT_TRUE(f2.defined);
    EXPECT_NEAR(f2.least_squares, 2.0, 1e-12);
    for (double s : f2.pairwise) EXPECT_NEAR(s, 2.0, 1e-12);
    EXPECT_NEAR(convergence_rates(h, e1).least_squares, 1.0, 1e-12);
}

TEST(Rates, PublishedStandardColumn) {
    const std::vector<double> h{0.0625, 0.037037037037, 0.0227272727273, 0.013698630137,
                                0.00826446280992, 0.005, 0.00302114803625, 0.00183486238532};
    const std::vector<double> e{0.00591807395578, 0.00200486493141, 0.000733311783114, 0.000260727150577,
                                9.48617059382e-05, 3.46668703305e-05, 1.26445070934e-05, 4.66319402008e-06};
    const double slope = convergence_rates(h, e).least_squares;
    EXPECT_GE(slope, 1.9);
    EXPECT_LE(slope, 2.1);
    EXPECT_NEAR(slope, 2.03, 0.01);
}

TEST(Rates, ZeroAndBadInput) {
    const std::vector<double> h{0.1, 0.05};
    const RateFit f = convergence_rates(h, std::vector<double>{1e-3, 0.0});
    EXPECT_FALSE(f.defined);
    EXPECT_TRUE(std::isnan(f.least_squares));
    EXPECT_THROW(convergence_rates(std::vector<double>{0.1}, std::vector<double>{1.0}), InvalidArgument);
    EXPECT_THROW(convergence_rates(std::vector<double>{0.05, 0.1}, std::vector<double>{1.0, 2.0}), InvalidArgument);
}

TEST(Config, Parsing) {
    const Degeneration d = Degeneration::parse("count:10:42");
    EXPECT_EQ(d.mode, Degeneration::Mode::count);
    EXPECT_EQ(d.count, 10u);
    EXPECT_EQ(d.seed, 42u);
    EXPECT_EQ(d.to_string(), "count:10:42");
    EXPECT_EQ(Degeneration::parse("dense").mode, Degeneration::Mode::dense);
    EXPECT_EQ(Degeneration::parse("none").mode, Degeneration::Mode::none);
    for (const char* bad : {"count:10", "count:x:1", "sparse", "count:1:2:3"}) {
        EXPECT_THROW(Degeneration::parse(bad), InvalidArgument) << bad;
    }
    EXPECT_DOUBLE_EQ(EpsilonRule::parse("h2").epsilon(16), 1.0 / 256);
    EXPECT_DOUBLE_EQ(EpsilonRule::parse("fixed:0.001").epsilon(16), 0.001);
    EXPECT_THROW(EpsilonRule::parse("fixed:-1"), InvalidArgument);
    EXPECT_THROW(EpsilonRule::parse("h3"), InvalidArgument);
    EXPECT_EQ(parse_scheme("stabilized"), Scheme::stabilized);
    EXPECT_EQ(parse_solver("cg"), SolverKind::cg);
    EXPECT_THROW(parse_solver("lu"), InvalidArgument);
}

TEST(Config, Validation) {
    StudyConfig c = quiet(Scheme::stabilized, {9, 10}, "dense");
    EXPECT_THROW(c.validate(), InvalidArgument);
    c.sizes = {9, 18};
    EXPECT_NO_THROW(c.validate());
    c.sizes = {9, 9};
    EXPECT_THROW(c.validate(), InvalidArgument);
    c.sizes = {};
    EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Study, PristineRates) {
    const StudyResult r = run_study(quiet(Scheme::standard, {8, 16, 32, 64}, "none"));
    ASSERT_EQ(r.records.size(), 4u);
    const double l2 = column_rates(r.records, "l2_err").least_squares;
    const double h1 = column_rates(r.records, "h1_err").least_squares;
    EXPECT_GE(l2, 1.9);
    EXPECT_LE(l2, 2.1);
    EXPECT_GE(h1, 0.9);
    EXPECT_LE(h1, 1.1);
    const StudyResult small = run_study(quiet(Scheme::standard, {8, 16, 32}, "none"));
    EXPECT_NEAR(column_rates(small.records, "l2_err").least_squares, 2.0, 0.1);
    for (const auto& rec : r.records) {
        EXPECT_DOUBLE_EQ(rec.h, 1.0 / static_cast<double>(rec.n));
        EXPECT_EQ(rec.ndof, (rec.n - 1) * (rec.n - 1));
        EXPECT_FALSE(rec.h1_err_post.has_value());
        EXPECT_FALSE(rec.wall_time.has_value());
    }
}

TEST(Study, SchemesCoincideWithoutDegeneration) {
    const StudyResult a = run_study(quiet(Scheme::standard, {8, 12}, "none"));
    const StudyResult b = run_study(quiet(Scheme::stabilized, {8, 12}, "none"));
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        EXPECT_EQ(a.records[k].l2_err, b.records[k].l2_err);
        EXPECT_EQ(a.records[k].h1_err, b.records[k].h1_err);
        EXPECT_EQ(a.records[k].kappa, b.records[k].kappa);
        EXPECT_EQ(b.records[k].h1_err_post, b.records[k].h1_err);
    }
}

TEST(Study, StandardSliverMagnitudes) {
    const ConvergenceRecord r = run_single(quiet(Scheme::standard, {16}, "count:10:1"), 16);
    EXPECT_NEAR(r.l2_err, 5.9e-3, 0.5 * 5.9e-3);
    EXPECT_NEAR(r.h1_err, 0.228, 0.5 * 0.228);
    ASSERT_TRUE(r.kappa_h2.has_value());
    EXPECT_GT(*r.kappa_h2, 1.53 / 3);
    EXPECT_LT(*r.kappa_h2, 1.53 * 3);
}

TEST(Study, StabilizedPostProcessingHelps) {
    StudyConfig c = quiet(Scheme::stabilized, {16, 27, 44}, "count:10:1");
    c.cross_check_forms = true;
    const StudyResult r = run_study(c);
    EXPECT_LE(r.max_form_mismatch, 1e-10);
    for (const auto& rec : r.records) {
        ASSERT_TRUE(rec.h1_err_post.has_value());
        EXPECT_LE(*rec.h1_err_post, rec.h1_err + 1e-12);
        ASSERT_TRUE(rec.kappa_h2.has_value());
        EXPECT_GT(*rec.kappa_h2, 0.43 / 2);
        EXPECT_LT(*rec.kappa_h2, 0.43 * 2);
    }
    EXPECT_GT(r.records[0].h1_err, 1.3 * *r.records[0].h1_err_post);
}

TEST(Study, CgMatchesCholesky) {
    StudyConfig c = quiet(Scheme::standard, {16, 27}, "count:10:1");
    c.estimate_conditioning = false;
    const StudyResult a = run_study(c);
    c.solver = SolverKind::cg;
    const StudyResult b = run_study(c);
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        EXPECT_NEAR(b.records[k].l2_err / a.records[k].l2_err, 1.0, 1e-6);
        EXPECT_FALSE(a.records[k].kappa.has_value());
    }
}

TEST(Study, ValidationFailureIsReported) {
    StudyConfig c = quiet(Scheme::stabilized, {16, 27}, "count:10:1");
    c.max_extended_cells = 14;
    const StudyResult r = run_study(c);
    EXPECT_TRUE(r.records.empty());
    ASSERT_EQ(r.failures.size(), 2u);
    EXPECT_EQ(r.failures[0].n, 16u);
    EXPECT_FALSE(r.failures[0].diagnostic.empty());
    EXPECT_THROW(run_single(c, 16), ValidationError);
}

TEST(Study, DeterministicAndOrdered) {
    StudyConfig c = quiet(Scheme::stabilized, {27, 16}, "count:5:9");
    const StudyResult a = run_study(c);
    c.threads = 2;
    const StudyResult b = run_study(c);
    ASSERT_EQ(a.records.size(), 2u);
    EXPECT_EQ(a.records[0].n, 16u);
    std::ostringstream sa;
    std::ostringstream sb;
    write_csv(sa, a.records);
    write_csv(sb, b.records);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(Report, CsvRoundTripAndAbsence) {
    ConvergenceRecord r;
    r.n = 16;
    r.h = 1.0 / 16;
    r.ndof = 225;
    r.l2_err = 0.1 + 0.2;  // not representable in few digits
    r.h1_err = 1.0 / 3.0;
    r.kappa = 294.2069517339877;
    r.kappa_h2 = *r.kappa / 256;
    std::stringstream s;
    write_csv(s, {r});
    const std::string text = s.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
    EXPECT_NE(text.find(",225,0.30000000000000004,"), std::string::npos);
    EXPECT_NE(text.find(",0.33333333333333331,,294."), std::string::npos);
    EXPECT_EQ(text.back(), '\n');
    EXPECT_EQ(text[text.size() - 2], ',');  // empty wall_time
    const auto back = parse_csv(s);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0], r);
    EXPECT_FALSE(back[0].h1_err_post.has_value());
}

TEST(Report, CsvErrors) {
    EXPECT_THROW(write_csv(std::cout, {}), InvalidArgument);
    EXPECT_THROW(emit_csv({ConvergenceRecord{}}, "/nonexistent/dir/x.csv"), IoError);
    std::stringstream bad("n,h\n");
    EXPECT_THROW(parse_csv(bad), IoError);
    std::stringstream short_row(std::string(kCsvHeader) + "\n1,2,3\n");
    EXPECT_THROW(parse_csv(short_row), IoError);
}

TEST(Report, SvgHasOnePolylinePerColumn) {
    const StudyResult r = run_study(quiet(Scheme::stabilized, {16, 27, 44}, "count:4:1"));
    std::ostringstream s;
    write_svg_plot(s, r.records, {"l2_err", "h1_err", "h1_err_post"}, "errors");
    const std::string svg = s.str();
    EXPECT_EQ(count_of(svg, "<polyline"), 3u);
    EXPECT_EQ(count_of(svg, "class=\"guide\""), 2u);
    EXPECT_NE(svg.find("version=\"1.1\""), std::string::npos);
    EXPECT_EQ(count_of(svg, "<circle"), 9u);

    const StudyResult std_run = run_study(quiet(Scheme::standard, {16, 27}, "none"));
    std::ostringstream t;
    write_svg_plot(t, std_run.records, {"l2_err", "h1_err_post"});
    EXPECT_EQ(count_of(t.str(), "<polyline"), 1u);  // no data for the post-processed column

    const auto dir = std::filesystem::temp_directory_path() / "dmfem_report_test";
    std::filesystem::create_directories(dir);
    emit_svg_plot(r.records, {"kappa_h2"}, (dir / "k.svg").string());
    EXPECT_TRUE(std::filesystem::exists(dir / "k.svg"));
    std::filesystem::remove_all(dir);
}

TEST(Study, WritesArtifacts) {
    const auto dir = std::filesystem::temp_directory_path() / "dmfem_study_test";
    std::filesystem::create_directories(dir);
    StudyConfig c = quiet(Scheme::standard, {8, 16}, "none");
    c.csv_path = (dir / "s.csv").string();
    c.svg_path = (dir / "s.svg").string();
    const StudyResult r = run_study(c);
    const auto back = read_csv(c.csv_path);
    EXPECT_EQ(back, r.records);
    std::ifstream svg(c.svg_path);
    std::stringstream content;
    content << svg.rdbuf();
    EXPECT_EQ(count_of(content.str(), "<polyline"), 2u);
    std::filesystem::remove_all(dir);
}
