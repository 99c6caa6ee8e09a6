#pragma once

#include "xdr/retrieval/index.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xdr::retrieval {

struct Precision {
  double value = 0.0;
  int considered = 0;      // min(K, hits)
  bool truncated = false;  // K exceeded the ranked list
};

/// (# of the top K hits sharing query_label) / K. When the list is shorter
/// than K the ratio is taken over what is available and flagged. Throws
/// ValidationError when a needed label is missing.
Precision precision_at_k(const RankedResult& result, std::optional<int> query_label,
                         std::span<const std::optional<int>> index_labels, int k);

struct MetricRow {
  std::string direction;  // "<query>-><gallery>"
  int k = 0;
  double precision = 0.0;
  bool truncated = false;
  int queries = 0;
};

struct MetricTable {
  std::vector<MetricRow> rows;

  std::optional<double> find(const std::string& direction, int k) const;
};

/// Mean P@K over every query of `queries` against `gallery`, per K.
std::vector<MetricRow> evaluate_direction(const RetrievalIndex& queries, const RetrievalIndex& gallery,
                                          const std::string& direction, std::span<const int> ks);

/// Both directions, A->B rows first.
MetricTable evaluate_pair(const RetrievalIndex& a, const RetrievalIndex& b, const std::string& name_a,
                          const std::string& name_b, std::span<const int> ks);
MetricTable evaluate_pair(const encoder::Encoder& enc, std::span<const ImageRecord> a,
                          std::span<const ImageRecord> b, const std::string& name_a, const std::string& name_b,
                          std::span<const int> ks);

/// CSV with header `direction,K,precision,truncated,queries`.
std::string metrics_csv(const MetricTable& table);
std::string metrics_json(const MetricTable& table);

/// One JSON object per query: {"query_domain", "query", "hits": [[record, score], ...]}.
std::string rankings_jsonl(const RetrievalIndex& queries, const RetrievalIndex& gallery, int k);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace xdr::retrieval
