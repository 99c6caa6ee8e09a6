#pragma once

#include "xdr/core/types.hpp"

#include <vector>

namespace xdr::alignment {

struct Neighbor {
  int index = 0;
  double score = 0.0;

  bool operator==(const Neighbor&) const = default;
};

/// Best-first; scores non-increasing, indices unique.
using NeighborList = std::vector<Neighbor>;

/// Exact top-k by dot product (cosine for unit rows) of every query row
/// against every key row. Ties go to the lower key index. With exclude_self
/// the queries and keys are taken to be the same table and key i is skipped
/// for query i. Returns min(k, available) neighbours per query.
std::vector<NeighborList> cosine_topk(const Matrix& queries, const Matrix& keys, int k, bool exclude_self);

}  // namespace xdr::alignment
