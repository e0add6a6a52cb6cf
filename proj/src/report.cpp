#include "dmfem/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dmfem/errors.hpp"
#include "dmfem/format.hpp"

namespace dmfem {

namespace {

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

template <typename T>
T parse_field(std::string_view text, std::size_t line) {
    T value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw IoError("csv line " + std::to_string(line) + ": bad value '" + std::string(text) + "'");
    }
    return value;
}

std::optional<double> parse_optional(std::string_view text, std::size_t line) {
    if (text.empty()) return std::nullopt;
    return parse_field<double>(text, line);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

void check_nonempty(const std::vector<ConvergenceRecord>& records) {
    if (records.empty()) throw InvalidArgument("no records to report");
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Axis {
    double lo = 0.0;  // log10 bounds, whole decades
    double hi = 1.0;
    double px0 = 0.0;
    double px1 = 1.0;

    double map(double log_value) const { return px0 + (log_value - lo) / (hi - lo) * (px1 - px0); }
};

Axis decade_axis(double lo, double hi, double px0, double px1) {
    Axis a;
    a.lo = std::floor(lo);
    a.hi = std::ceil(hi);
    if (a.hi <= a.lo) a.hi = a.lo + 1.0;
    a.px0 = px0;
    a.px1 = px1;
    return a;
}

std::string px(double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << v;
    return s.str();
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records) {
    check_nonempty(records);
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.n << ',' << format_double(r.h) << ',' << r.ndof << ',' << format_double(r.l2_err) << ','
            << format_double(r.h1_err) << ',' << optional_field(r.h1_err_post) << ',' << optional_field(r.kappa)
            << ',' << optional_field(r.kappa_h2) << ',' << optional_field(r.wall_time) << '\n';
    }
}

void emit_csv(const std::vector<ConvergenceRecord>& records, const std::string& path) {
    check_nonempty(records);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_csv(out, records);
    if (!out.flush()) throw IoError("write to '" + path + "' failed");
}

std::vector<ConvergenceRecord> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw IoError("csv header mismatch");
    std::vector<ConvergenceRecord> records;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 9) throw IoError("csv line " + std::to_string(number) + ": expected 9 fields");
        ConvergenceRecord r;
        r.n = parse_field<std::size_t>(f[0], number);
        r.h = parse_field<double>(f[1], number);
        r.ndof = parse_field<std::size_t>(f[2], number);
        r.l2_err = parse_field<double>(f[3], number);
        r.h1_err = parse_field<double>(f[4], number);
        r.h1_err_post = parse_optional(f[5], number);
        r.kappa = parse_optional(f[6], number);
        r.kappa_h2 = parse_optional(f[7], number);
        r.wall_time = parse_optional(f[8], number);
        records.push_back(r);
    }
    return records;
}

std::vector<ConvergenceRecord> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse_csv(in);
}

void write_svg_plot(std::ostream& out, const std::vector<ConvergenceRecord>& records,
                    const std::vector<std::string>& columns, const std::string& title) {
    check_nonempty(records);
    struct Series {
        std::string name;
        std::vector<std::pair<double, double>> points;  // log10 h, log10 value
    };
    std::vector<Series> series;
    double xlo = std::numeric_limits<double>::infinity();
    double xhi = -xlo;
    double ylo = xlo;
    double yhi = -xlo;
    for (const auto& column : columns) {
        Series s{column, {}};
        for (const auto& r : records) {
            const auto v = column_value(r, column);
            if (!v || !(*v > 0.0) || !(r.h > 0.0)) continue;
            s.points.emplace_back(std::log10(r.h), std::log10(*v));
        }
        if (s.points.empty()) continue;
        std::sort(s.points.begin(), s.points.end());
        for (auto [x, y] : s.points) {
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
        }
        series.push_back(std::move(s));
    }
    if (series.empty()) {
        xlo = -2.0;
        xhi = -1.0;
        ylo = -2.0;
        yhi = 0.0;
    }

    constexpr double width = 640.0;
    constexpr double height = 480.0;
    constexpr double left = 80.0;
    constexpr double right = 170.0;
    constexpr double top = 40.0;
    constexpr double bottom = 60.0;
    const Axis ax = decade_axis(xlo, xhi, left, width - right);
    const Axis ay = decade_axis(ylo, yhi, height - bottom, top);

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<defs><clipPath id=\"plot\"><rect x=\"" << px(ax.px0) << "\" y=\"" << px(ay.px1) << "\" width=\""
        << px(ax.px1 - ax.px0) << "\" height=\"" << px(ay.px0 - ay.px1) << "\"/></clipPath></defs>\n";
    if (!title.empty()) {
        out << "<text x=\"" << px(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            << "font-size=\"15\">" << title << "</text>\n";
    }

    // decade grid and labels
    out << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (double d = ax.lo; d <= ax.hi + 0.5; d += 1.0) {
        out << "<line x1=\"" << px(ax.map(d)) << "\" y1=\"" << px(ay.px0) << "\" x2=\"" << px(ax.map(d))
            << "\" y2=\"" << px(ay.px1) << "\"/>\n";
    }
    for (double d = ay.lo; d <= ay.hi + 0.5; d += 1.0) {
        out << "<line x1=\"" << px(ax.px0) << "\" y1=\"" << px(ay.map(d)) << "\" x2=\"" << px(ax.px1)
            << "\" y2=\"" << px(ay.map(d)) << "\"/>\n";
    }
    out << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (double d = ax.lo; d <= ax.hi + 0.5; d += 1.0) {
        out << "<text x=\"" << px(ax.map(d)) << "\" y=\"" << px(ay.px0 + 18) << "\" text-anchor=\"middle\">1e"
            << static_cast<int>(d) << "</text>\n";
    }
    for (double d = ay.lo; d <= ay.hi + 0.5; d += 1.0) {
        out << "<text x=\"" << px(ax.px0 - 8) << "\" y=\"" << px(ay.map(d) + 4) << "\" text-anchor=\"end\">1e"
            << static_cast<int>(d) << "</text>\n";
    }
    out << "<text x=\"" << px((ax.px0 + ax.px1) / 2) << "\" y=\"" << px(height - 16)
        << "\" text-anchor=\"middle\">h</text>\n</g>\n";
    out << "<rect x=\"" << px(ax.px0) << "\" y=\"" << px(ay.px1) << "\" width=\"" << px(ax.px1 - ax.px0)
        << "\" height=\"" << px(ay.px0 - ay.px1) << "\" fill=\"none\" stroke=\"black\"/>\n";

    // reference slopes through a point below the first series' finest entry
    if (!series.empty()) {
        const auto [x0, y0] = series.front().points.front();
        out << "<g clip-path=\"url(#plot)\" stroke=\"#777777\" stroke-dasharray=\"6,4\" fill=\"none\">\n";
        for (int slope : {1, 2}) {
            const double ya = y0 - 0.3;
            const double yb = ya + slope * (ax.hi - x0);
            out << "<line class=\"guide\" x1=\"" << px(ax.map(x0)) << "\" y1=\"" << px(ay.map(ya)) << "\" x2=\""
                << px(ax.map(ax.hi)) << "\" y2=\"" << px(ay.map(yb)) << "\"/>\n";
        }
        out << "</g>\n";
    }

    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = kPalette[k % std::size(kPalette)];
        out << "<polyline class=\"series\" data-column=\"" << series[k].name << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\" points=\"";
        for (std::size_t p = 0; p < series[k].points.size(); ++p) {
            const auto [x, y] = series[k].points[p];
            out << (p ? " " : "") << px(ax.map(x)) << ',' << px(ay.map(y));
        }
        out << "\"/>\n<g fill=\"" << color << "\">\n";
        for (const auto& [x, y] : series[k].points) {
            out << "<circle cx=\"" << px(ax.map(x)) << "\" cy=\"" << px(ay.map(y)) << "\" r=\"3.5\"/>\n";
        }
        out << "</g>\n";
        const double ly = top + 20.0 + 22.0 * static_cast<double>(k);
        out << "<line x1=\"" << px(width - right + 15) << "\" y1=\"" << px(ly) << "\" x2=\"" << px(width - right + 40)
            << "\" y2=\"" << px(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << px(width - right + 46) << "\" y=\"" << px(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[k].name << "</text>\n";
    }
    const double gy = top + 20.0 + 22.0 * static_cast<double>(series.size());
    out << "<line x1=\"" << px(width - right + 15) << "\" y1=\"" << px(gy) << "\" x2=\"" << px(width - right + 40)
        << "\" y2=\"" << px(gy) << "\" stroke=\"#777777\" stroke-dasharray=\"6,4\"/>\n"
        << "<text x=\"" << px(width - right + 46) << "\" y=\"" << px(gy + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">slope 1, 2</text>\n";
    out << "</svg>\n";
}

void emit_svg_plot(const std::vector<ConvergenceRecord>& records, const std::vector<std::string>& columns,
                   const std::string& path, const std::string& title) {
    check_nonempty(records);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_svg_plot(out, records, columns, title);
    if (!out.flush()) throw IoError("write to '" + path + "' failed");
}

}  // namespace dmfem
