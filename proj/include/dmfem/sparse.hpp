#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dmfem/mesh.hpp"

namespace dmfem {

using DenseVector = std::vector<double>;

struct Triplet {
    Index row = 0;
    Index col = 0;
    double value = 0.0;
};

/// Compressed sparse row matrix. Column indices are sorted within each row
/// and no explicit zeros are stored.
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(std::size_t rows, std::size_t cols, std::vector<Index> row_offsets, std::vector<Index> col_indices,
              std::vector<double> values);

    /// Duplicates are summed in insertion order, so two matrices built from
    /// mirrored triplet streams are bitwise transposes of each other.
    static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
    static CsrMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    std::span<const Index> row_offsets() const noexcept { return offsets_; }
    std::span<const Index> col_indices() const noexcept { return cols_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const Index> row_cols(Index r) const {
        return {cols_idx_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
    }
    std::span<const double> row_values(Index r) const {
        return {values_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
    }

    /// Entry (r, c), zero when not stored.
    double at(Index r, Index c) const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    DenseVector operator*(std::span<const double> x) const;

    /// x^T A x
    double quadratic_form(std::span<const double> x) const;

    CsrMatrix transpose() const;
    CsrMatrix scaled(double s) const;
    DenseVector diagonal() const;
    double max_abs() const;
    bool is_symmetric() const;  // exact comparison

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Index> offsets_{0};
    std::vector<Index> cols_idx_;
    std::vector<double> values_;
};

/// alpha * a + beta * b
CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha = 1.0, double beta = 1.0);

/// a * b
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);

/// max_ij |a_ij - b_ij|
double max_abs_difference(const CsrMatrix& a, const CsrMatrix& b);

/// `i j value` lines, 0-based, 17 significant digits.
void write_coordinate(std::ostream& out, const CsrMatrix& a);
void write_coordinate(const std::string& path, const CsrMatrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace dmfem
