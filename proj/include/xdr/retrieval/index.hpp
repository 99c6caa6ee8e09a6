#pragma once

#include "xdr/core/types.hpp"
#include "xdr/encoder/encoder.hpp"

#include <optional>
#include <span>
#include <vector>

namespace xdr::retrieval {

struct RetrievalIndex {
  DomainId domain = 0;
  Matrix embeddings;                       // row = record id
  std::vector<std::optional<int>> labels;  // evaluation only

  int size() const { return static_cast<int>(embeddings.rows()); }
};

struct Hit {
  RecordId record = 0;
  double score = 0.0;
};

struct RankedResult {
  DomainId query_domain = 0;
  RecordId query_record = 0;
  std::vector<Hit> hits;  // best first
};

/// Encodes every record in inference mode. Throws ValidationError for an
/// empty domain.
RetrievalIndex build_index(const encoder::Encoder& enc, std::span<const ImageRecord> records);
RetrievalIndex index_from_embeddings(DomainId domain, Matrix embeddings, std::span<const ImageRecord> records);

/// Top min(K, size) rows by dot product; ties by ascending record id.
RankedResult retrieve(const Vector& query, const RetrievalIndex& index, int k);

}  // namespace xdr::retrieval
