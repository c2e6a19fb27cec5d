#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"

namespace wfspec {

/// binom(n, k) as an exact integer; throws if the result overflows 64 bits.
inline std::uint64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (r > UINT64_MAX) throw ParameterDomainError("binomial overflow");
  }
  return static_cast<std::uint64_t>(r);
}

/// Multi-index n = (n_1, ..., n_{K-1}) of non-negative degrees.
///
/// Stored 0-based: degree(c) is n_{c+1}. tail_sum(j) is N_j = sum_{i>j} n_i in
/// 1-based terms, so tail_sum(0) = |n| and tail_sum(K-1) = 0.
class IndexVector {
 public:
  IndexVector() = default;
  explicit IndexVector(std::vector<int> degrees) : n_(std::move(degrees)) {
    for (int d : n_)
      if (d < 0) throw ParameterDomainError("negative degree in index vector");
  }

  std::size_t size() const { return n_.size(); }
  int degree(std::size_t c) const { return n_[c]; }
  int operator[](std::size_t c) const { return n_[c]; }
  const std::vector<int>& degrees() const { return n_; }

  int total() const { return std::accumulate(n_.begin(), n_.end(), 0); }

  int tail_sum(std::size_t j) const {
    int s = 0;
    for (std::size_t c = j; c < n_.size(); ++c) s += n_[c];
    return s;
  }

  /// Graded lexicographic order: total degree first, then n_1, n_2, ... ascending.
  friend std::strong_ordering operator<=>(const IndexVector& a, const IndexVector& b) {
    const int ta = a.total(), tb = b.total();
    if (ta != tb) return ta <=> tb;
    return a.n_ <=> b.n_;
  }
  friend bool operator==(const IndexVector& a, const IndexVector& b) { return a.n_ == b.n_; }

  std::string str() const {
    std::string s = "(";
    for (std::size_t c = 0; c < n_.size(); ++c) {
      if (c) s += ',';
      s += std::to_string(n_[c]);
    }
    return s + ")";
  }

 private:
  std::vector<int> n_;
};

inline std::ostream& operator<<(std::ostream& os, const IndexVector& n) { return os << n.str(); }

struct IndexVectorHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int d : v) h = (h ^ static_cast<std::size_t>(d)) * 1099511628211ull;
    return h;
  }
};

/// Number of multi-indices of length K-1 with |n| = l.
inline std::uint64_t count_at_degree(int K, int l) {
  if (K < 2) throw ParameterDomainError("K must be at least 2");
  if (l < 0) throw ParameterDomainError("degree must be non-negative");
  return binomial(l + K - 2, K - 2);
}

/// Number of multi-indices with |n| <= D, i.e. binom(D+K-1, K-1).
inline std::uint64_t basis_size(int K, int D) {
  if (K < 2) throw ParameterDomainError("K must be at least 2");
  if (D < 0) throw ParameterDomainError("truncation level must be non-negative");
  return binomial(D + K - 1, K - 1);
}

/// All multi-indices with |n| <= D in graded lexicographic order, with the
/// inverse map from index tuple to linear position.
class BasisEnumeration {
 public:
  BasisEnumeration(int K, int D) : K_(K), D_(D) {
    const std::uint64_t U = basis_size(K, D);
    indices_.reserve(U);
    std::vector<int> cur(K - 1, 0);
    for (int l = 0; l <= D; ++l) fill_degree(cur, 0, l);
    position_.reserve(U);
    for (std::size_t p = 0; p < indices_.size(); ++p) position_.emplace(indices_[p].degrees(), p);
  }

  int K() const { return K_; }
  int dimension() const { return K_ - 1; }
  int truncation() const { return D_; }
  std::size_t size() const { return indices_.size(); }

  const IndexVector& operator[](std::size_t p) const { return indices_[p]; }
  const std::vector<IndexVector>& indices() const { return indices_; }

  /// Linear position of n. Throws if |n| > D or the length does not match.
  std::size_t position(const IndexVector& n) const { return position(n.degrees()); }
  std::size_t position(const std::vector<int>& n) const {
    auto it = position_.find(n);
    if (it == position_.end()) throw ParameterDomainError("index vector not in enumeration");
    return it->second;
  }
  /// Like position() but returns size() for indices outside the enumeration.
  std::size_t find(const std::vector<int>& n) const {
    auto it = position_.find(n);
    return it == position_.end() ? indices_.size() : it->second;
  }

  /// Position of the first index with total degree l (so U(l-1) for l >= 1).
  std::size_t degree_begin(int l) const { return l <= 0 ? 0 : basis_size(K_, l - 1); }

 private:
  void fill_degree(std::vector<int>& cur, std::size_t c, int remaining) {
    if (c + 1 == cur.size()) {
      cur[c] = remaining;
      indices_.emplace_back(cur);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      cur[c] = v;
      fill_degree(cur, c + 1, remaining - v);
    }
  }

  int K_;
  int D_;
  std::vector<IndexVector> indices_;
  std::unordered_map<std::vector<int>, std::size_t, IndexVectorHash> position_;
};

}  // namespace wfspec
