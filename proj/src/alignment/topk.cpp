#include "xdr/alignment/topk.hpp"

#include "xdr/core/errors.hpp"

#include <algorithm>
#include <numeric>

namespace xdr::alignment {

std::vector<NeighborList> cosine_topk(const Matrix& queries, const Matrix& keys, int k, bool exclude_self) {
  if (k < 1) throw ValidationError("k must be ≥ 1");
  if (queries.rows() > 0 && keys.rows() > 0 && queries.cols() != keys.cols()) {
    throw ValidationError("query and key dimensions differ");
  }
  const Matrix scores = queries * keys.transpose();
  std::vector<NeighborList> out(static_cast<std::size_t>(queries.rows()));
  std::vector<int> order;
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    order.clear();
    for (int j = 0; j < keys.rows(); ++j) {
      if (exclude_self && j == q) continue;
      order.push_back(j);
    }
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    auto better = [&](int a, int b) {
      const double sa = scores(q, a), sb = scores(q, b);
      return sa > sb || (sa == sb && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
    auto& list = out[static_cast<std::size_t>(q)];
    list.reserve(take);
    for (std::size_t r = 0; r < take; ++r) list.push_back({order[r], scores(q, order[r])});
  }
  return out;
}

}  // namespace xdr::alignment
