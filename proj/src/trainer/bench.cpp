#include "xdr/trainer/bench.hpp"

#include "xdr/core/errors.hpp"
#include "xdr/core/manifest.hpp"
#include "xdr/retrieval/probe.hpp"
#include "xdr/trainer/setup.hpp"

#include <cstdio>
#include <sstream>

namespace xdr::trainer {

retrieval::MetricTable evaluate_encoder(const encoder::Encoder& enc, const data::DatasetPartition& data,
                                        const std::vector<int>& ks) {
  if (data.domains.size() < 2) throw ValidationError("evaluation needs two domains");
  return retrieval::evaluate_pair(enc, data.records[0], data.records[1], data.domains[0].name, data.domains[1].name,
                                  ks);
}

std::map<int, double> cross_domain_precision(const retrieval::MetricTable& table, const std::vector<int>& ks) {
  std::map<int, double> out;
  for (int k : ks) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : table.rows) {
      if (r.k == k) {
        sum += r.precision;
        ++n;
      }
    }
    out[k] = n ? sum / n : 0.0;
  }
  return out;
}

Matrix raw_pixels(const std::vector<ImageRecord>& records) {
  if (records.empty()) return {};
  const auto n = static_cast<Eigen::Index>(records.front().image.pixels.size());
  Matrix m(static_cast<Eigen::Index>(records.size()), n);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& px = records[i].image.pixels;
    if (static_cast<Eigen::Index>(px.size()) != n) throw ValidationError("images differ in size");
    for (Eigen::Index j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), j) = px[static_cast<std::size_t>(j)];
  }
  return m;
}

namespace {

double probe_encoder(const encoder::Encoder& enc, const data::DatasetPartition& data) {
  return retrieval::domain_probe_accuracy(enc.encode_all(data.records[0]), enc.encode_all(data.records[1]));
}

}  // namespace

BenchReport run_toy_bench(const Config& config) {
  if (config.dataset.kind != "toy") throw ValidationError("toy-bench needs dataset = toy");
  const auto ws = prepare_workspace(config);
  BenchReport report;
  report.ks = config.eval_k;
  report.probe_raw =
      retrieval::domain_probe_accuracy(raw_pixels(ws.data.records[0]), raw_pixels(ws.data.records[1]));

  Config full_cfg = config;
  full_cfg.ablation = {true, true, true};
  Trainer full(full_cfg, ws.data, *ws.backend, ws.tokens);
  auto state = full.initial_state();
  report.probe_init = probe_encoder(state.encoder, ws.data);
  report.probe_post_od = report.probe_init;
  while (state.epoch < full.schedule().total()) {
    report.full.epochs.push_back(full.run_epoch(state));
    if (state.epoch == full.schedule().od_epochs) report.probe_post_od = probe_encoder(state.encoder, ws.data);
  }
  report.probe_final = probe_encoder(state.encoder, ws.data);
  report.full.row = ablation_row(full_cfg.ablation);
  report.full.table = evaluate_encoder(state.encoder, ws.data, report.ks);
  report.full.precision = cross_domain_precision(report.full.table, report.ks);

  Config ab_cfg = full_cfg;
  ab_cfg.ablation.use_od = false;
  Trainer ablated(ab_cfg, ws.data, *ws.backend, ws.tokens);
  auto ab_state = ablated.initial_state();
  report.no_od.epochs = ablated.run(ab_state);
  report.no_od.row = ablation_row(ab_cfg.ablation);
  report.no_od.table = evaluate_encoder(ab_state.encoder, ws.data, report.ks);
  report.no_od.precision = cross_domain_precision(report.no_od.table, report.ks);
  return report;
}

nlohmann::json BenchReport::to_json() const {
  auto run_json = [](const BenchRun& r) {
    nlohmann::json p = nlohmann::json::object();
    for (const auto& [k, v] : r.precision) p["P@" + std::to_string(k)] = v;
    return nlohmann::json{{"row", r.row}, {"cross_domain_precision", p}, {"epochs", r.epochs.size()}};
  };
  nlohmann::json margins = nlohmann::json::object();
  for (int k : ks) margins["P@" + std::to_string(k)] = full.precision.at(k) - no_od.precision.at(k);
  return {{"ks", ks},
          {"rows", {run_json(full), run_json(no_od)}},
          {"precision_margin_full_minus_no_od", margins},
          {"domain_probe",
           {{"raw_pixels", probe_raw}, {"init", probe_init}, {"post_od", probe_post_od}, {"final", probe_final}}},
          {"probe_margin_raw_minus_post_od", probe_raw - probe_post_od}};
}

std::string BenchReport::to_text() const {
  std::ostringstream out;
  char buf[160];
  out << "row             ";
  for (int k : ks) {
    std::snprintf(buf, sizeof(buf), "  P@%-6d", k);
    out << buf;
  }
  out << "\n";
  for (const auto* r : {&full, &no_od}) {
    std::snprintf(buf, sizeof(buf), "%-16s", r->row.c_str());
    out << buf;
    for (int k : ks) {
      std::snprintf(buf, sizeof(buf), "  %.4f  ", r->precision.at(k));
      out << buf;
    }
    out << "\n";
  }
  std::snprintf(buf, sizeof(buf), "domain probe: raw %.4f  init %.4f  post-OD %.4f  final %.4f\n", probe_raw,
                probe_init, probe_post_od, probe_final);
  out << buf;
  return out.str();
}

}  // namespace xdr::trainer
