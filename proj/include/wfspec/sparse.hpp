#pragma once

#include <algorithm>
#include <cstddef>
#include <iomanip>
#include <ostream>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace wfspec {

/// Row-major sparse matrix; each row keeps (column, value) pairs sorted by column.
template <class Real>
class SparseRows {
 public:
  using Entry = std::pair<std::size_t, Real>;

  SparseRows() = default;
  SparseRows(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows) {}

  static SparseRows identity(std::size_t n) {
    SparseRows I(n, n);
    for (std::size_t r = 0; r < n; ++r) I.rows_[r].emplace_back(r, Real(1));
    return I;
  }

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }
  const std::vector<Entry>& row(std::size_t r) const { return rows_[r]; }

  std::size_t nonzeros() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.size();
    return n;
  }

  /// Replaces row r; entries need not be sorted and duplicate columns are summed.
  void set_row(std::size_t r, std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& x, const Entry& y) { return x.first < y.first; });
    std::vector<Entry> merged;
    merged.reserve(entries.size());
    for (auto& e : entries) {
      if (e.first >= cols_) throw ParameterDomainError("sparse column out of range");
      if (!merged.empty() && merged.back().first == e.first)
        merged.back().second += e.second;
      else
        merged.push_back(std::move(e));
    }
    rows_[r] = std::move(merged);
  }

  Real get(std::size_t r, std::size_t c) const {
    const auto& row = rows_[r];
    auto it = std::lower_bound(row.begin(), row.end(), c,
                               [](const Entry& e, std::size_t col) { return e.first < col; });
    return (it != row.end() && it->first == c) ? it->second : Real(0);
  }

  /// Leading n x n block.
  SparseRows leading_block(std::size_t n) const {
    SparseRows B(n, n);
    for (std::size_t r = 0; r < n && r < rows(); ++r)
      for (const auto& e : rows_[r])
        if (e.first < n) B.rows_[r].push_back(e);
    return B;
  }

  template <class Other>
  SparseRows<Other> cast() const {
    SparseRows<Other> out(rows(), cols_);
    for (std::size_t r = 0; r < rows(); ++r) {
      std::vector<std::pair<std::size_t, Other>> row;
      row.reserve(rows_[r].size());
      for (const auto& e : rows_[r]) row.emplace_back(e.first, static_cast<Other>(e.second));
      out.set_row(r, std::move(row));
    }
    return out;
  }

  /// this += alpha * other
  void add_scaled(const SparseRows& other, const Real& alpha) {
    if (other.rows() != rows() || other.cols() != cols_) throw ParameterDomainError("shape mismatch");
    for (std::size_t r = 0; r < rows(); ++r) {
      if (other.rows_[r].empty()) continue;
      std::vector<Entry> merged;
      merged.reserve(rows_[r].size() + other.rows_[r].size());
      auto a = rows_[r].begin(), ae = rows_[r].end();
      auto b = other.rows_[r].begin(), be = other.rows_[r].end();
      while (a != ae || b != be) {
        if (b == be || (a != ae && a->first < b->first)) {
          merged.push_back(*a++);
        } else if (a == ae || b->first < a->first) {
          merged.emplace_back(b->first, alpha * b->second);
          ++b;
        } else {
          merged.emplace_back(a->first, a->second + alpha * b->second);
          ++a;
          ++b;
        }
      }
      rows_[r] = std::move(merged);
    }
  }

  void add_diagonal(std::size_t r, const Real& v) {
    auto& row = rows_[r];
    auto it = std::lower_bound(row.begin(), row.end(), r,
                               [](const Entry& e, std::size_t col) { return e.first < col; });
    if (it != row.end() && it->first == r)
      it->second += v;
    else
      row.insert(it, Entry(r, v));
  }

  friend SparseRows operator*(const SparseRows& A, const SparseRows& B) {
    if (A.cols() != B.rows()) throw ParameterDomainError("shape mismatch in sparse product");
    SparseRows C(A.rows(), B.cols());
    std::vector<Real> acc(B.cols(), Real(0));
    std::vector<char> used(B.cols(), 0);
    std::vector<std::size_t> touched;
    for (std::size_t r = 0; r < A.rows(); ++r) {
      touched.clear();
      for (const auto& [k, a] : A.rows_[r])
        for (const auto& [c, b] : B.rows_[k]) {
          if (!used[c]) {
            used[c] = 1;
            touched.push_back(c);
          }
          acc[c] += a * b;
        }
      std::sort(touched.begin(), touched.end());
      auto& out = C.rows_[r];
      out.reserve(touched.size());
      for (std::size_t c : touched) {
        out.emplace_back(c, acc[c]);
        acc[c] = Real(0);
        used[c] = 0;
      }
    }
    return C;
  }

  /// One "row,col,value" line per stored entry.
  void write_triplets(std::ostream& os) const {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(17) << "row,col,value\n";
    for (std::size_t r = 0; r < rows(); ++r)
      for (const auto& e : rows_[r]) os << r << ',' << e.first << ',' << static_cast<double>(e.second) << '\n';
    os.flags(flags);
    os.precision(prec);
  }

 private:
  std::size_t cols_ = 0;
  std::vector<std::vector<Entry>> rows_;
};

}  // namespace wfspec
