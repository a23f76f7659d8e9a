#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

namespace nsdarcy {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Row-compressed matrix. Column indices are strictly increasing within each row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<int> offsets, std::vector<int> indices,
            std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  const std::vector<int>& offsets() const { return offsets_; }
  const std::vector<int>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }

  /// Stored value at (i, j), zero if absent.
  double coeff(std::size_t i, std::size_t j) const;
  double frobenius_norm() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> indices_;
  std::vector<double> values_;
};

/// Duplicates are summed. Throws std::out_of_range on a bad index.
CsrMatrix assemble_from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet>& triplets);

std::vector<double> matvec(const CsrMatrix& a, const std::vector<double>& x);
/// x^T A y.
double bilinear(const CsrMatrix& a, const std::vector<double>& x, const std::vector<double>& y);
CsrMatrix transpose(const CsrMatrix& a);

/// Appends scale * a, shifted by (row_offset, col_offset), to a triplet list.
void append_block(std::vector<Triplet>& out, const CsrMatrix& a, int row_offset, int col_offset,
                  double scale = 1.0);

struct SolverOptions {
  bool iterative = false;
  double iterative_tolerance = 1e-13;
  int max_iterations = 20000;
  double residual_tolerance = 1e-10;
};

/// Factorization of a square matrix, reusable for any number of right-hand sides.
/// solve() is const and safe to call concurrently.
class LuFactors {
 public:
  static LuFactors factorize(const CsrMatrix& a, const SolverOptions& options = {});

  LuFactors();
  ~LuFactors();
  LuFactors(LuFactors&&) noexcept;
  LuFactors& operator=(LuFactors&&) noexcept;

  std::size_t size() const;
  /// Returns x with ||Ax - b|| <= tol (||A||_F ||x|| + ||b||); throws SolverError otherwise.
  std::vector<double> solve(const std::vector<double>& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Number of factorizations performed since the last reset (process-wide).
long factorization_count();
void reset_factorization_count();

/// Row/column elimination of essential conditions.
///
/// The eliminated operator keeps the free block, puts 1 on constrained diagonals and zeros
/// elsewhere in constrained rows and columns. The removed free-row/constrained-column coupling
/// is kept to lift the right-hand side.
class DirichletElimination {
 public:
  DirichletElimination() = default;
  DirichletElimination(const CsrMatrix& a, std::vector<char> constrained);

  const CsrMatrix& matrix() const { return reduced_; }
  const std::vector<char>& constrained() const { return constrained_; }
  /// rhs_free - C g on free rows, g on constrained rows.
  std::vector<double> lift(const std::vector<double>& rhs, const std::vector<double>& values) const;

 private:
  CsrMatrix reduced_;
  CsrMatrix coupling_;
  std::vector<char> constrained_;
};

double norm2(const std::vector<double>& x);

}  // namespace nsdarcy
