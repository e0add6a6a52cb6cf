#include "dmfem/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "dmfem/errors.hpp"
#include "dmfem/format.hpp"

namespace dmfem {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Index> row_offsets,
                     std::vector<Index> col_indices, std::vector<double> values)
    : rows_(rows), cols_(cols), offsets_(std::move(row_offsets)), cols_idx_(std::move(col_indices)),
      values_(std::move(values)) {
    if (offsets_.size() != rows_ + 1 || offsets_.front() != 0 || offsets_.back() != cols_idx_.size() ||
        cols_idx_.size() != values_.size()) {
        throw InvalidArgument("inconsistent CSR arrays");
    }
    for (std::size_t r = 0; r < rows_; ++r) {
        if (offsets_[r] > offsets_[r + 1]) throw InvalidArgument("CSR row offsets not monotone");
        for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k) {
            if (cols_idx_[k] >= cols_) throw InvalidArgument("CSR column out of range");
            if (k > offsets_[r] && cols_idx_[k] <= cols_idx_[k - 1]) {
                throw InvalidArgument("CSR columns not strictly increasing");
            }
        }
    }
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
        if (t.row >= rows || t.col >= cols) throw InvalidArgument("triplet out of range");
    }
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.offsets_.assign(rows + 1, 0);
    for (std::size_t k = 0; k < triplets.size();) {
        const Index r = triplets[k].row;
        const Index c = triplets[k].col;
        double sum = 0.0;
        for (; k < triplets.size() && triplets[k].row == r && triplets[k].col == c; ++k) sum += triplets[k].value;
        if (sum != 0.0) {
            m.cols_idx_.push_back(c);
            m.values_.push_back(sum);
            ++m.offsets_[r + 1];
        }
    }
    for (std::size_t r = 0; r < rows; ++r) m.offsets_[r + 1] += m.offsets_[r];
    return m;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
    std::vector<Index> offsets(n + 1);
    std::vector<Index> cols(n);
    for (std::size_t k = 0; k < n; ++k) {
        offsets[k + 1] = k + 1;
        cols[k] = k;
    }
    return CsrMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

double CsrMatrix::at(Index r, Index c) const {
    const auto cs = row_cols(r);
    const auto it = std::lower_bound(cs.begin(), cs.end(), c);
    if (it == cs.end() || *it != c) return 0.0;
    return values_[offsets_[r] + static_cast<std::size_t>(it - cs.begin())];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != cols_ || y.size() != rows_) throw InvalidArgument("dimension mismatch in mat-vec");
    for (std::size_t r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k) s += values_[k] * x[cols_idx_[k]];
        y[r] = s;
    }
}

DenseVector CsrMatrix::operator*(std::span<const double> x) const {
    DenseVector y(rows_);
    multiply(x, y);
    return y;
}

double CsrMatrix::quadratic_form(std::span<const double> x) const {
    if (x.size() != cols_ || rows_ != cols_) throw InvalidArgument("dimension mismatch in quadratic form");
    double s = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        double row = 0.0;
        for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k) row += values_[k] * x[cols_idx_[k]];
        s += x[r] * row;
    }
    return s;
}

CsrMatrix CsrMatrix::transpose() const {
    std::vector<Index> offsets(cols_ + 1, 0);
    for (Index c : cols_idx_) ++offsets[c + 1];
    for (std::size_t c = 0; c < cols_; ++c) offsets[c + 1] += offsets[c];
    std::vector<Index> cols(nnz());
    std::vector<double> vals(nnz());
    auto cursor = offsets;
    for (std::size_t r = 0; r < rows_; ++r) {
        for (Index k = offsets_[r]; k < offsets_[r + 1]; ++k) {
            const Index dst = cursor[cols_idx_[k]]++;
            cols[dst] = r;
            vals[dst] = values_[k];
        }
    }
    return CsrMatrix(cols_, rows_, std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix CsrMatrix::scaled(double s) const {
    if (s == 0.0) return CsrMatrix(rows_, cols_, std::vector<Index>(rows_ + 1, 0), {}, {});
    CsrMatrix m = *this;
    for (double& v : m.values_) v *= s;
    return m;
}

DenseVector CsrMatrix::diagonal() const {
    DenseVector d(std::min(rows_, cols_), 0.0);
    for (std::size_t r = 0; r < d.size(); ++r) d[r] = at(r, r);
    return d;
}

double CsrMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool CsrMatrix::is_symmetric() const {
    if (rows_ != cols_) return false;
    const CsrMatrix t = transpose();
    return t.offsets_ == offsets_ && t.cols_idx_ == cols_idx_ && t.values_ == values_;
}

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha, double beta) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("dimension mismatch in add");
    std::vector<Index> offsets(a.rows() + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(a.nnz() + b.nnz());
    vals.reserve(a.nnz() + b.nnz());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto ac = a.row_cols(r);
        const auto av = a.row_values(r);
        const auto bc = b.row_cols(r);
        const auto bv = b.row_values(r);
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < ac.size() || j < bc.size()) {
            Index c;
            double v;
            if (j == bc.size() || (i < ac.size() && ac[i] < bc[j])) {
                c = ac[i];
                v = alpha * av[i++];
            } else if (i == ac.size() || bc[j] < ac[i]) {
                c = bc[j];
                v = beta * bv[j++];
            } else {
                c = ac[i];
                v = alpha * av[i++] + beta * bv[j++];
            }
            if (v != 0.0) {
                cols.push_back(c);
                vals.push_back(v);
            }
        }
        offsets[r + 1] = cols.size();
    }
    return CsrMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.cols() != b.rows()) throw InvalidArgument("dimension mismatch in product");
    std::vector<Index> offsets(a.rows() + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    std::vector<double> acc(b.cols(), 0.0);
    std::vector<Index> marker(b.cols(), kNoCell);
    std::vector<Index> touched;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        touched.clear();
        const auto ac = a.row_cols(r);
        const auto av = a.row_values(r);
        for (std::size_t k = 0; k < ac.size(); ++k) {
            const auto bc = b.row_cols(ac[k]);
            const auto bv = b.row_values(ac[k]);
            for (std::size_t l = 0; l < bc.size(); ++l) {
                if (marker[bc[l]] != r) {
                    marker[bc[l]] = r;
                    acc[bc[l]] = 0.0;
                    touched.push_back(bc[l]);
                }
                acc[bc[l]] += av[k] * bv[l];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (Index c : touched) {
            if (acc[c] != 0.0) {
                cols.push_back(c);
                vals.push_back(acc[c]);
            }
        }
        offsets[r + 1] = cols.size();
    }
    return CsrMatrix(a.rows(), b.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

double max_abs_difference(const CsrMatrix& a, const CsrMatrix& b) {
    return add(a, b, 1.0, -1.0).max_abs();
}

void write_coordinate(std::ostream& out, const CsrMatrix& a) {
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto cs = a.row_cols(r);
        const auto vs = a.row_values(r);
        for (std::size_t k = 0; k < cs.size(); ++k) out << r << ' ' << cs[k] << ' ' << format_double(vs[k]) << '\n';
    }
}

void write_coordinate(const std::string& path, const CsrMatrix& a) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_coordinate(out, a);
    if (!out) throw IoError("write to '" + path + "' failed");
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("dimension mismatch in dot");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace dmfem
