#include "xdr/retrieval/index.hpp"

#include "xdr/core/errors.hpp"

#include <algorithm>
#include <numeric>

namespace xdr::retrieval {

RetrievalIndex index_from_embeddings(DomainId domain, Matrix embeddings, std::span<const ImageRecord> records) {
  if (records.empty()) throw ValidationError("cannot index an empty domain");
  if (embeddings.rows() != static_cast<Eigen::Index>(records.size())) {
    throw ValidationError("embedding rows do not match records");
  }
  RetrievalIndex index;
  index.domain = domain;
  index.embeddings = std::move(embeddings);
  index.labels.reserve(records.size());
  for (const auto& r : records) {
    index.labels.push_back(r.label.has_value() ? std::optional<int>(r.label.read_for_evaluation()) : std::nullopt);
  }
  return index;
}

RetrievalIndex build_index(const encoder::Encoder& enc, std::span<const ImageRecord> records) {
  if (records.empty()) throw ValidationError("cannot index an empty domain");
  return index_from_embeddings(records.front().domain, enc.encode_all(records), records);
}

RankedResult retrieve(const Vector& query, const RetrievalIndex& index, int k) {
  if (k < 1) throw ValidationError("K must be ≥ 1");
  if (query.size() != index.embeddings.cols()) throw ValidationError("query dimension differs from index");
  const Vector scores = index.embeddings * query;
  std::vector<int> order(static_cast<std::size_t>(index.size()));
  std::iota(order.begin(), order.end(), 0);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), [&](int a, int b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  });
  RankedResult result;
  result.query_domain = -1;
  result.query_record = -1;
  for (std::size_t i = 0; i < take; ++i) result.hits.push_back({order[i], scores[order[i]]});
  return result;
}

}  // namespace xdr::retrieval
