#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dmfem/study.hpp"

namespace dmfem {

inline constexpr const char* kCsvHeader = "n,h,ndof,l2_err,h1_err,h1_err_post,kappa,kappa_h2,wall_time";

/// 17 significant digits; absent values are empty fields.
void write_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records);
void emit_csv(const std::vector<ConvergenceRecord>& records, const std::string& path);

std::vector<ConvergenceRecord> parse_csv(std::istream& in);
std::vector<ConvergenceRecord> read_csv(const std::string& path);

/// Log-log chart of the given columns against h, one polyline per column
/// with data, plus slope-1 and slope-2 guides.
void write_svg_plot(std::ostream& out, const std::vector<ConvergenceRecord>& records,
                    const std::vector<std::string>& columns, const std::string& title = "");
void emit_svg_plot(const std::vector<ConvergenceRecord>& records, const std::vector<std::string>& columns,
                   const std::string& path, const std::string& title = "");

}  // namespace dmfem
