#pragma once

#include "xdr/core/config.hpp"
#include "xdr/data/dataset.hpp"
#include "xdr/encoder/encoder.hpp"
#include "xdr/retrieval/metrics.hpp"
#include "xdr/trainer/trainer.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace xdr::trainer {

/// Both retrieval directions between the first two domains.
retrieval::MetricTable evaluate_encoder(const encoder::Encoder& enc, const data::DatasetPartition& data,
                                        const std::vector<int>& ks);
/// Mean of the two directions per K.
std::map<int, double> cross_domain_precision(const retrieval::MetricTable& table, const std::vector<int>& ks);

/// Flattened pixels, one row per record.
Matrix raw_pixels(const std::vector<ImageRecord>& records);

struct BenchRun {
  std::string row;  // ablation row label
  std::vector<EpochRow> epochs;
  retrieval::MetricTable table;
  std::map<int, double> precision;
};

struct BenchReport {
  std::vector<int> ks;
  BenchRun full;
  BenchRun no_od;
  double probe_raw = 0.0;      // domain probe on raw pixels
  double probe_init = 0.0;     // on z from the untrained encoder
  double probe_post_od = 0.0;  // on z right after the OD phase
  double probe_final = 0.0;    // on z after the full pipeline

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Trains the full pipeline and the no-OD ablation from the same seeds on the
/// configured toy world.
BenchReport run_toy_bench(const Config& config);

}  // namespace xdr::trainer
