#pragma once

#include "xdr/alignment/topk.hpp"
#include "xdr/core/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace xdr::alignment {

enum class AdjacencyMode { InDomain, CrossDomain };

/// Sparse binary matrix of mutual top-k pairs.
class MutualAdjacency {
 public:
  MutualAdjacency() = default;
  /// pairs need not be sorted; duplicates are removed.
  MutualAdjacency(int rows, int cols, AdjacencyMode mode, std::vector<std::pair<int, int>> pairs);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  AdjacencyMode mode() const { return mode_; }
  /// Sorted by (row, col).
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  std::size_t nnz() const { return pairs_.size(); }
  /// Sorted column indices of row i.
  const std::vector<int>& row(int i) const;
  bool contains(int i, int j) const;
  bool is_symmetric() const;

  /// Every pair as an "i j" line, sorted, after a "# shape R C mode" line.
  std::string to_text() const;
  static MutualAdjacency from_text(const std::string& text);

  bool operator==(const MutualAdjacency& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && mode_ == o.mode_ && pairs_ == o.pairs_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  AdjacencyMode mode_ = AdjacencyMode::InDomain;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<std::vector<int>> row_cols_;
};

/// (i, j) present iff j is in forward[i] and i is in backward[j].
/// forward maps rows to columns, backward maps columns to rows.
MutualAdjacency mutual_adjacency(const std::vector<NeighborList>& forward, const std::vector<NeighborList>& backward,
                                 AdjacencyMode mode);

MutualAdjacency in_domain_adjacency(const Matrix& table, int k, bool exclude_self);
/// Rows index table_a (domain A), columns table_b (domain B).
MutualAdjacency cross_domain_adjacency(const Matrix& table_a, const Matrix& table_b, int k);
/// The same pairs transposed (B -> A orientation).
MutualAdjacency transpose(const MutualAdjacency& adj);

}  // namespace xdr::alignment
