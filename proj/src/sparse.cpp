#include "nsdarcy/sparse.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <atomic>
#include <sstream>
#include <string>

namespace nsdarcy {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<int> offsets, std::vector<int> indices,
                     std::vector<double> values)
    : rows_(rows), cols_(cols), offsets_(std::move(offsets)), indices_(std::move(indices)), values_(std::move(values)) {
  if (offsets_.size() != rows_ + 1 || indices_.size() != values_.size() ||
      static_cast<std::size_t>(offsets_.back()) != values_.size()) {
    throw std::invalid_argument("inconsistent CSR arrays");
  }
}

double CsrMatrix::coeff(std::size_t i, std::size_t j) const {
  const auto first = indices_.begin() + offsets_[i];
  const auto last = indices_.begin() + offsets_[i + 1];
  const auto it = std::lower_bound(first, last, static_cast<int>(j));
  if (it == last || *it != static_cast<int>(j)) return 0.0;
  return values_[static_cast<std::size_t>(it - indices_.begin())];
}

double CsrMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

CsrMatrix assemble_from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet>& triplets) {
  std::vector<int> count(rows + 1, 0);
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= rows || static_cast<std::size_t>(t.col) >= cols) {
      throw std::out_of_range("triplet index out of range");
    }
    ++count[static_cast<std::size_t>(t.row) + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  // Bucket by row, keeping input order within a row so summation is deterministic.
  std::vector<int> cols_raw(triplets.size());
  std::vector<double> vals_raw(triplets.size());
  std::vector<int> fill(count.begin(), count.end() - 1);
  for (const Triplet& t : triplets) {
    const int k = fill[static_cast<std::size_t>(t.row)]++;
    cols_raw[static_cast<std::size_t>(k)] = t.col;
    vals_raw[static_cast<std::size_t>(k)] = t.value;
  }

  std::vector<int> offsets(rows + 1, 0);
  std::vector<int> indices;
  std::vector<double> values;
  indices.reserve(triplets.size());
  values.reserve(triplets.size());
  std::vector<int> order;
  for (std::size_t r = 0; r < rows; ++r) {
    const int b = count[r];
    const int e = count[r + 1];
    order.resize(static_cast<std::size_t>(e - b));
    std::iota(order.begin(), order.end(), b);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      return cols_raw[static_cast<std::size_t>(x)] < cols_raw[static_cast<std::size_t>(y)];
    });
    for (std::size_t k = 0; k < order.size(); ++k) {
      const int c = cols_raw[static_cast<std::size_t>(order[k])];
      const double v = vals_raw[static_cast<std::size_t>(order[k])];
      if (k > 0 && indices.back() == c && static_cast<int>(indices.size()) > offsets[r]) {
        values.back() += v;
      } else {
        indices.push_back(c);
        values.push_back(v);
      }
    }
    offsets[r + 1] = static_cast<int>(indices.size());
  }
  return CsrMatrix(rows, cols, std::move(offsets), std::move(indices), std::move(values));
}

std::vector<double> matvec(const CsrMatrix& a, const std::vector<double>& x) {
  if (x.size() != a.cols()) throw std::invalid_argument("matvec dimension mismatch");
  std::vector<double> y(a.rows(), 0.0);
  const auto& off = a.offsets();
  const auto& idx = a.indices();
  const auto& val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int k = off[i]; k < off[i + 1]; ++k) s += val[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
    y[i] = s;
  }
  return y;
}

double bilinear(const CsrMatrix& a, const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != a.rows()) throw std::invalid_argument("bilinear dimension mismatch");
  const std::vector<double> ay = matvec(a, y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * ay[i];
  return s;
}

CsrMatrix transpose(const CsrMatrix& a) {
  std::vector<Triplet> t;
  t.reserve(a.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (int k = a.offsets()[i]; k < a.offsets()[i + 1]; ++k) {
      t.push_back({a.indices()[static_cast<std::size_t>(k)], static_cast<int>(i), a.values()[static_cast<std::size_t>(k)]});
    }
  }
  return assemble_from_triplets(a.cols(), a.rows(), t);
}

void append_block(std::vector<Triplet>& out, const CsrMatrix& a, int row_offset, int col_offset, double scale) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (int k = a.offsets()[i]; k < a.offsets()[i + 1]; ++k) {
      out.push_back({static_cast<int>(i) + row_offset, a.indices()[static_cast<std::size_t>(k)] + col_offset,
                     scale * a.values()[static_cast<std::size_t>(k)]});
    }
  }
}

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

namespace {

std::atomic<long> g_factorizations{0};

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

EigenSparse to_eigen(const CsrMatrix& a) {
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(a.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (int k = a.offsets()[i]; k < a.offsets()[i + 1]; ++k) {
      t.emplace_back(static_cast<int>(i), a.indices()[static_cast<std::size_t>(k)], a.values()[static_cast<std::size_t>(k)]);
    }
  }
  EigenSparse m(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

struct LuFactors::Impl {
  CsrMatrix matrix;
  double norm_f = 0.0;
  SolverOptions options;
  EigenSparse eigen;
  Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>> lu;
};

LuFactors::LuFactors() = default;
LuFactors::~LuFactors() = default;
LuFactors::LuFactors(LuFactors&&) noexcept = default;
LuFactors& LuFactors::operator=(LuFactors&&) noexcept = default;

LuFactors LuFactors::factorize(const CsrMatrix& a, const SolverOptions& options) {
  if (a.rows() != a.cols()) throw SolverError("factorize: matrix is not square");
  LuFactors f;
  f.impl_ = std::make_unique<Impl>();
  f.impl_->matrix = a;
  f.impl_->norm_f = a.frobenius_norm();
  f.impl_->options = options;
  f.impl_->eigen = to_eigen(a);
  if (!options.iterative) {
    f.impl_->lu.analyzePattern(f.impl_->eigen);
    f.impl_->lu.factorize(f.impl_->eigen);
    if (f.impl_->lu.info() != Eigen::Success) {
      throw SolverError("sparse LU failed (n=" + std::to_string(a.rows()) + "): " + f.impl_->lu.lastErrorMessage());
    }
  }
  ++g_factorizations;
  return f;
}

std::size_t LuFactors::size() const { return impl_ ? impl_->matrix.rows() : 0; }

std::vector<double> LuFactors::solve(const std::vector<double>& b) const {
  if (!impl_) throw SolverError("solve on empty factorization");
  const std::size_t n = impl_->matrix.rows();
  if (b.size() != n) throw SolverError("solve: right-hand side has wrong size");
  Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd x;
  if (impl_->options.iterative) {
    Eigen::BiCGSTAB<EigenSparse, Eigen::IdentityPreconditioner> it;
    it.setTolerance(impl_->options.iterative_tolerance);
    it.setMaxIterations(impl_->options.max_iterations);
    it.compute(impl_->eigen);
    x = it.solve(rhs);
  } else {
    x = impl_->lu.solve(rhs);
  }
  std::vector<double> out(x.data(), x.data() + n);
  std::vector<double> r = matvec(impl_->matrix, out);
  for (std::size_t i = 0; i < n; ++i) r[i] -= b[i];
  const double res = norm2(r);
  const double bound = impl_->options.residual_tolerance * (impl_->norm_f * norm2(out) + norm2(b));
  if (!(res <= bound)) {
    std::ostringstream msg;
    msg << "linear solve residual check failed: |Ax-b|=" << res << " bound=" << bound << " n=" << n;
    throw SolverError(msg.str());
  }
  return out;
}

long factorization_count() { return g_factorizations; }
void reset_factorization_count() { g_factorizations = 0; }

DirichletElimination::DirichletElimination(const CsrMatrix& a, std::vector<char> constrained)
    : constrained_(std::move(constrained)) {
  if (a.rows() != a.cols() || constrained_.size() != a.rows()) {
    throw std::invalid_argument("Dirichlet elimination needs a square matrix and a full mask");
  }
  std::vector<Triplet> kept;
  std::vector<Triplet> coupled;
  kept.reserve(a.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (constrained_[i]) {
      kept.push_back({static_cast<int>(i), static_cast<int>(i), 1.0});
      continue;
    }
    for (int k = a.offsets()[i]; k < a.offsets()[i + 1]; ++k) {
      const int j = a.indices()[static_cast<std::size_t>(k)];
      const double v = a.values()[static_cast<std::size_t>(k)];
      if (constrained_[static_cast<std::size_t>(j)]) {
        coupled.push_back({static_cast<int>(i), j, v});
      } else {
        kept.push_back({static_cast<int>(i), j, v});
      }
    }
  }
  reduced_ = assemble_from_triplets(a.rows(), a.cols(), kept);
  coupling_ = assemble_from_triplets(a.rows(), a.cols(), coupled);
}

std::vector<double> DirichletElimination::lift(const std::vector<double>& rhs, const std::vector<double>& values) const {
  std::vector<double> g(values.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (constrained_[i]) g[i] = values[i];
  }
  std::vector<double> out = rhs;
  const std::vector<double> cg = matvec(coupling_, g);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = constrained_[i] ? g[i] : out[i] - cg[i];
  return out;
}

}  // namespace nsdarcy
