#pragma once

// Plain-loop reference implementations used as test oracles. They share no
// code with the library beyond the data types.

#include "xdr/core/types.hpp"
#include "xdr/encoder/bank.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using xdr::Matrix;
using xdr::Vector;

inline double dot(const Matrix& a, int i, const Matrix& b, int j) {
  double s = 0.0;
  for (int c = 0; c < a.cols(); ++c) s += a(i, c) * b(j, c);
  return s;
}

inline Matrix random_unit_rows(int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, d);
  for (int i = 0; i < n; ++i) {
    double norm = 0.0;
    for (int c = 0; c < d; ++c) {
      m(i, c) = g(rng);
      norm += m(i, c) * m(i, c);
    }
    norm = std::sqrt(norm);
    for (int c = 0; c < d; ++c) m(i, c) /= norm;
  }
  return m;
}

/// -(1/n) sum_i log( exp(z_i.zh_i/tau) / sum_j exp(z_i.zh_j/tau) )
inline double loss_aug(const Matrix& z, const Matrix& zh, double tau) {
  const int n = static_cast<int>(z.rows());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double denom = 0.0;
    for (int j = 0; j < n; ++j) denom += std::exp(dot(z, i, zh, j) / tau);
    total += std::log(std::exp(dot(z, i, zh, i) / tau) / denom);
  }
  return -total / n;
}

/// Bank as a plain oldest-first list of (record, vector).
struct Bank {
  std::vector<int> records;
  Matrix keys;
};

inline Bank copy_bank(const xdr::encoder::FeatureBank& b) {
  Bank out;
  out.keys.resize(b.size(), b.dim());
  for (int i = 0; i < b.size(); ++i) {
    out.records.push_back(b.at(i).record);
    for (int c = 0; c < b.dim(); ++c) out.keys(i, c) = b.at(i).values[c];
  }
  return out;
}

/// Triple loop. adj[r][c] marks batch-row record r as adjacent to column
/// record c; the positive key is the newest bank entry of c, absent records
/// are skipped.
inline double loss_neighbour(const Matrix& z, const std::vector<int>& rows, const Bank& bank,
                             const std::vector<std::vector<int>>& adj, double tau, double eps) {
  const int n = static_cast<int>(z.rows());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double lse_sum = 0.0;
    for (int q = 0; q < static_cast<int>(bank.records.size()); ++q) lse_sum += std::exp(dot(z, i, bank.keys, q) / tau);
    const double lse = std::log(lse_sum);
    double num = 0.0;
    double count = 0.0;
    for (int c = 0; c < static_cast<int>(adj[rows[i]].size()); ++c) {
      if (!adj[rows[i]][c]) continue;
      int newest = -1;
      for (int q = 0; q < static_cast<int>(bank.records.size()); ++q) {
        if (bank.records[q] == c) newest = q;
      }
      if (newest < 0) continue;
      num += dot(z, i, bank.keys, newest) / tau - lse;
      count += 1.0;
    }
    total += num / (count + eps);
  }
  return -total / n;
}

/// Indices of the k best keys for query i: full sort, ties to the lower index.
inline std::vector<int> topk(const Matrix& q, int i, const Matrix& keys, int k, bool exclude_self) {
  std::vector<std::pair<double, int>> all;
  for (int j = 0; j < keys.rows(); ++j) {
    if (exclude_self && j == i) continue;
    all.push_back({-dot(q, i, keys, j), j});
  }
  std::sort(all.begin(), all.end());
  std::vector<int> out;
  for (int r = 0; r < k && r < static_cast<int>(all.size()); ++r) out.push_back(all[r].second);
  return out;
}

/// Dense 0/1 mutual top-k matrix.
inline std::vector<std::vector<int>> mutual_topk(const Matrix& a, const Matrix& b, int k, bool exclude_self) {
  std::vector<std::set<int>> fwd(a.rows()), bwd(b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j : topk(a, i, b, k, exclude_self)) fwd[i].insert(j);
  }
  for (int j = 0; j < b.rows(); ++j) {
    for (int i : topk(b, j, a, k, exclude_self)) bwd[j].insert(i);
  }
  std::vector<std::vector<int>> m(a.rows(), std::vector<int>(b.rows(), 0));
  for (int i = 0; i < a.rows(); ++i) {
    for (int j : fwd[i]) m[i][j] = bwd[j].count(i) ? 1 : 0;
  }
  return m;
}

/// Central differences of f at x along every coordinate.
inline std::vector<double> central_diff(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

/// max_i |a_i - b_i| / max(1, max |b|)
inline double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / std::max(1e-12, scale);
}

inline std::vector<double> flatten(const Matrix& m) {
  std::vector<double> v;
  for (int i = 0; i < m.rows(); ++i)
    for (int c = 0; c < m.cols(); ++c) v.push_back(m(i, c));
  return v;
}

inline Matrix unflatten(const std::vector<double>& v, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = v[static_cast<std::size_t>(i) * cols + c];
  return m;
}

/// Counts label matches in the first k of a ranked id list.
inline double precision_count(const std::vector<int>& ranked, const std::vector<int>& gallery_labels, int query_label,
                              int k) {
  int hits = 0;
  for (int r = 0; r < k; ++r) hits += gallery_labels[ranked[r]] == query_label;
  return static_cast<double>(hits) / k;
}

}  // namespace oracle
