#include "xdr/retrieval/metrics.hpp"

#include "xdr/core/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace xdr::retrieval {
namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

Precision precision_at_k(const RankedResult& result, std::optional<int> query_label,
                         std::span<const std::optional<int>> index_labels, int k) {
  if (k < 1) throw ValidationError("K must be ≥ 1");
  if (!query_label) throw ValidationError("query has no label; evaluation requires labels");
  Precision p;
  p.considered = std::min<int>(k, static_cast<int>(result.hits.size()));
  p.truncated = p.considered < k;
  if (p.considered == 0) return p;
  int correct = 0;
  for (int i = 0; i < p.considered; ++i) {
    const auto rec = result.hits[static_cast<std::size_t>(i)].record;
    if (rec < 0 || rec >= static_cast<int>(index_labels.size())) throw ValidationError("hit outside the gallery");
    const auto& lbl = index_labels[static_cast<std::size_t>(rec)];
    if (!lbl) throw ValidationError("gallery record " + std::to_string(rec) + " has no label");
    if (*lbl == *query_label) ++correct;
  }
  p.value = static_cast<double>(correct) / p.considered;
  return p;
}

std::optional<double> MetricTable::find(const std::string& direction, int k) const {
  for (const auto& r : rows) {
    if (r.direction == direction && r.k == k) return r.precision;
  }
  return std::nullopt;
}

std::vector<MetricRow> evaluate_direction(const RetrievalIndex& queries, const RetrievalIndex& gallery,
                                          const std::string& direction, std::span<const int> ks) {
  if (queries.size() == 0 || gallery.size() == 0) throw ValidationError("evaluation needs non-empty domains");
  int kmax = 1;
  for (int k : ks) {
    if (k < 1) throw ValidationError("K must be ≥ 1");
    kmax = std::max(kmax, k);
  }
  std::vector<double> sums(ks.size(), 0.0);
  std::vector<bool> truncated(ks.size(), false);
  for (int q = 0; q < queries.size(); ++q) {
    const auto ranked = retrieve(queries.embeddings.row(q).transpose(), gallery, kmax);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const auto p = precision_at_k(ranked, queries.labels[static_cast<std::size_t>(q)], gallery.labels, ks[i]);
      sums[i] += p.value;
      truncated[i] = truncated[i] || p.truncated;
    }
  }
  std::vector<MetricRow> rows;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    rows.push_back({direction, ks[i], sums[i] / queries.size(), truncated[i], queries.size()});
  }
  return rows;
}

MetricTable evaluate_pair(const RetrievalIndex& a, const RetrievalIndex& b, const std::string& name_a,
                          const std::string& name_b, std::span<const int> ks) {
  MetricTable table;
  table.rows = evaluate_direction(a, b, name_a + "->" + name_b, ks);
  auto back = evaluate_direction(b, a, name_b + "->" + name_a, ks);
  table.rows.insert(table.rows.end(), back.begin(), back.end());
  return table;
}

MetricTable evaluate_pair(const encoder::Encoder& enc, std::span<const ImageRecord> a,
                          std::span<const ImageRecord> b, const std::string& name_a, const std::string& name_b,
                          std::span<const int> ks) {
  return evaluate_pair(build_index(enc, a), build_index(enc, b), name_a, name_b, ks);
}

std::string metrics_csv(const MetricTable& table) {
  std::ostringstream out;
  out << "direction,K,precision,truncated,queries\n";
  for (const auto& r : table.rows) {
    out << r.direction << ',' << r.k << ',' << fixed(r.precision) << ',' << (r.truncated ? 1 : 0) << ','
        << r.queries << '\n';
  }
  return out.str();
}

std::string metrics_json(const MetricTable& table) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : table.rows) {
    doc.push_back({{"direction", r.direction},
                   {"K", r.k},
                   {"precision", r.precision},
                   {"truncated", r.truncated},
                   {"queries", r.queries}});
  }
  return doc.dump(2) + "\n";
}

std::string rankings_jsonl(const RetrievalIndex& queries, const RetrievalIndex& gallery, int k) {
  std::ostringstream out;
  for (int q = 0; q < queries.size(); ++q) {
    const auto ranked = retrieve(queries.embeddings.row(q).transpose(), gallery, k);
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : ranked.hits) hits.push_back({h.record, h.score});
    nlohmann::json line = {{"query_domain", queries.domain}, {"query", q}, {"gallery_domain", gallery.domain}};
    line["hits"] = hits;
    out << line.dump() << '\n';
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace xdr::retrieval
