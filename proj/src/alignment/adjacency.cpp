#include "xdr/alignment/adjacency.hpp"

#include "xdr/core/errors.hpp"

#include <algorithm>
#include <sstream>

namespace xdr::alignment {

MutualAdjacency::MutualAdjacency(int rows, int cols, AdjacencyMode mode, std::vector<std::pair<int, int>> pairs)
    : rows_(rows), cols_(cols), mode_(mode), pairs_(std::move(pairs)) {
  if (rows < 0 || cols < 0) throw ValidationError("adjacency shape must be non-negative");
  if (mode == AdjacencyMode::InDomain && rows != cols) throw ValidationError("in-domain adjacency must be square");
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  row_cols_.assign(static_cast<std::size_t>(rows), {});
  for (const auto& [i, j] : pairs_) {
    if (i < 0 || i >= rows || j < 0 || j >= cols) {
      throw ValidationError("adjacency pair (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
    }
    row_cols_[static_cast<std::size_t>(i)].push_back(j);
  }
}

const std::vector<int>& MutualAdjacency::row(int i) const {
  if (i < 0 || i >= rows_) throw ValidationError("adjacency row " + std::to_string(i) + " out of range");
  return row_cols_[static_cast<std::size_t>(i)];
}

bool MutualAdjacency::contains(int i, int j) const {
  if (i < 0 || i >= rows_) return false;
  const auto& r = row_cols_[static_cast<std::size_t>(i)];
  return std::binary_search(r.begin(), r.end(), j);
}

bool MutualAdjacency::is_symmetric() const {
  if (rows_ != cols_) return false;
  return std::all_of(pairs_.begin(), pairs_.end(), [this](const auto& p) { return contains(p.second, p.first); });
}

std::string MutualAdjacency::to_text() const {
  std::ostringstream out;
  out << "# shape " << rows_ << ' ' << cols_ << ' ' << (mode_ == AdjacencyMode::InDomain ? "in_domain" : "cross_domain")
      << '\n';
  for (const auto& [i, j] : pairs_) out << i << ' ' << j << '\n';
  return out.str();
}

MutualAdjacency MutualAdjacency::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int rows = -1, cols = -1;
  AdjacencyMode mode = AdjacencyMode::InDomain;
  std::vector<std::pair<int, int>> pairs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, word, mode_name;
      ls >> hash >> word;
      if (word == "shape") {
        ls >> rows >> cols >> mode_name;
        mode = mode_name == "cross_domain" ? AdjacencyMode::CrossDomain : AdjacencyMode::InDomain;
      }
      continue;
    }
    int i = 0, j = 0;
    if (!(ls >> i >> j)) throw ValidationError("bad adjacency line '" + line + "'");
    pairs.emplace_back(i, j);
  }
  if (rows < 0) {
    // No header: infer the smallest shape that holds every pair.
    rows = cols = 0;
    for (const auto& [i, j] : pairs) {
      rows = std::max(rows, i + 1);
      cols = std::max(cols, j + 1);
    }
    if (mode == AdjacencyMode::InDomain) rows = cols = std::max(rows, cols);
  }
  return MutualAdjacency(rows, cols, mode, std::move(pairs));
}

MutualAdjacency mutual_adjacency(const std::vector<NeighborList>& forward, const std::vector<NeighborList>& backward,
                                 AdjacencyMode mode) {
  const int rows = static_cast<int>(forward.size());
  const int cols = static_cast<int>(backward.size());
  auto lists_contain = [](const NeighborList& list, int idx) {
    return std::any_of(list.begin(), list.end(), [idx](const Neighbor& n) { return n.index == idx; });
  };
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < rows; ++i) {
    for (const auto& n : forward[static_cast<std::size_t>(i)]) {
      if (n.index < 0 || n.index >= cols) {
        throw ValidationError("neighbour index " + std::to_string(n.index) + " out of range");
      }
      if (lists_contain(backward[static_cast<std::size_t>(n.index)], i)) pairs.emplace_back(i, n.index);
    }
  }
  for (const auto& list : backward) {
    for (const auto& n : list) {
      if (n.index < 0 || n.index >= rows) {
        throw ValidationError("neighbour index " + std::to_string(n.index) + " out of range");
      }
    }
  }
  return MutualAdjacency(rows, cols, mode, std::move(pairs));
}

MutualAdjacency in_domain_adjacency(const Matrix& table, int k, bool exclude_self) {
  const auto nn = cosine_topk(table, table, k, exclude_self);
  return mutual_adjacency(nn, nn, AdjacencyMode::InDomain);
}

MutualAdjacency cross_domain_adjacency(const Matrix& table_a, const Matrix& table_b, int k) {
  const auto a_to_b = cosine_topk(table_a, table_b, k, false);
  const auto b_to_a = cosine_topk(table_b, table_a, k, false);
  return mutual_adjacency(a_to_b, b_to_a, AdjacencyMode::CrossDomain);
}

MutualAdjacency transpose(const MutualAdjacency& adj) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(adj.nnz());
  for (const auto& [i, j] : adj.pairs()) pairs.emplace_back(j, i);
  return MutualAdjacency(adj.cols(), adj.rows(), adj.mode(), std::move(pairs));
}

}  // namespace xdr::alignment
