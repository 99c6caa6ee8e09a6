// xdr: train, evaluate and inspect cross-domain retrieval models.

#include "xdr/core/config.hpp"
#include "xdr/core/errors.hpp"
#include "xdr/core/manifest.hpp"
#include "xdr/core/phase.hpp"
#include "xdr/retrieval/index.hpp"
#include "xdr/retrieval/metrics.hpp"
#include "xdr/trainer/bench.hpp"
#include "xdr/trainer/checkpoint.hpp"
#include "xdr/trainer/setup.hpp"
#include "xdr/trainer/trainer.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace xdr;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
  std::string ablate;
};

fs::path output_dir(const CommonFlags& f, const std::string& command) {
  if (!f.out.empty()) return f.out;
  if (const char* root = std::getenv("XDR_OUTPUT_ROOT"); root && *root) return fs::path(root) / command;
  return fs::path("runs") / command;
}

void apply_overrides(Config& c, const CommonFlags& f) {
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
    auto trim = [](std::string v) {
      const auto a = v.find_first_not_of(" \t");
      const auto b = v.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
    };
    apply_config_entry(c, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  if (f.seed) c.seed = *f.seed;
  if (!f.ablate.empty()) {
    std::stringstream list(f.ablate);
    std::string item;
    while (std::getline(list, item, ',')) {
      if (item == "od") c.ablation.use_od = false;
      else if (item == "pa1") c.ablation.use_pa1 = false;
      else if (item == "pa2") c.ablation.use_pa2 = false;
      else throw ValidationError("--ablate takes od, pa1, pa2; got '" + item + "'");
    }
  }
}

Config resolve_config(const CommonFlags& f) {
  Config c = f.config_path.empty() ? default_config() : load_config(f.config_path);
  apply_overrides(c, f);
  validate_config(c);
  return c;
}

void begin_run(const fs::path& out, const Config& c, const std::string& command) {
  fs::create_directories(out);
  write_json(out / "manifest.json", make_manifest(c, command));
}

std::vector<int> parse_ks(const std::string& text, const std::vector<int>& fallback) {
  if (text.empty()) return fallback;
  std::vector<int> ks;
  std::stringstream list(text);
  std::string item;
  while (std::getline(list, item, ',')) {
    try {
      ks.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ValidationError("bad K value '" + item + "'");
    }
    if (ks.back() < 1) throw ValidationError("K must be >= 1");
  }
  return ks;
}

std::string phase_tag(const trainer::Checkpoint& ck) {
  if (ck.state.epoch == 0) return "init";
  return phase_name(select_phase(ck.state.epoch - 1, trainer::effective_schedule(ck.config)));
}

int cmd_train(const CommonFlags& f, const std::string& resume) {
  Config c = resolve_config(f);
  const auto out = output_dir(f, "train");
  begin_run(out, c, "train");
  const auto ws = trainer::prepare_workspace(c);
  for (std::size_t d = 0; d < ws.loads.size(); ++d) {
    const auto& spec = ws.data.domains[d];
    write_json(out / ("scan_" + spec.name + ".json"),
               data::tree_manifest(c.dataset.roots.at(spec.name), spec, ws.loads[d]));
  }
  trainer::Trainer tr(c, ws.data, *ws.backend, ws.tokens);
  auto state = resume.empty() ? tr.initial_state() : trainer::load_checkpoint(resume).state;
  trainer::TrainOptions opts;
  opts.checkpoint_path = out / "checkpoint.bin";
  opts.progress = true;
  const auto rows = tr.run(state, opts);
  retrieval::write_text(out / "metrics.csv", trainer::metrics_csv(rows));
  retrieval::write_text(out / "timing.csv", trainer::timing_csv(rows));
  std::cerr << "wrote " << (out / "checkpoint.bin").string() << "\n";
  return 0;
}

trainer::Checkpoint open_checkpoint(const std::string& path, const CommonFlags& f) {
  auto ck = trainer::load_checkpoint(path);
  apply_overrides(ck.config, f);
  validate_config(ck.config);
  return ck;
}

int cmd_eval(const CommonFlags& f, const std::string& ckpt, const std::string& ks_text, bool rankings) {
  auto ck = open_checkpoint(ckpt, f);
  const auto out = output_dir(f, "eval");
  begin_run(out, ck.config, "eval");
  const auto ks = parse_ks(ks_text, ck.config.eval_k);
  const auto ws = trainer::prepare_workspace(ck.config);
  const auto table = trainer::evaluate_encoder(ck.state.encoder, ws.data, ks);
  retrieval::write_text(out / "metrics.csv", retrieval::metrics_csv(table));
  retrieval::write_text(out / "metrics.json", retrieval::metrics_json(table));
  if (rankings) {
    const auto a = retrieval::build_index(ck.state.encoder, ws.data.records[0]);
    const auto b = retrieval::build_index(ck.state.encoder, ws.data.records[1]);
    int kmax = 1;
    for (int k : ks) kmax = std::max(kmax, k);
    retrieval::write_text(out / "rankings.jsonl",
                          retrieval::rankings_jsonl(a, b, kmax) + retrieval::rankings_jsonl(b, a, kmax));
  }
  std::cout << retrieval::metrics_csv(table);
  return 0;
}

int cmd_retrieve(const CommonFlags& f, const std::string& ckpt, const std::string& from, int query, int k) {
  auto ck = open_checkpoint(ckpt, f);
  const auto out = output_dir(f, "retrieve");
  begin_run(out, ck.config, "retrieve");
  const auto ws = trainer::prepare_workspace(ck.config);
  int src = -1;
  for (std::size_t d = 0; d < ws.data.domains.size(); ++d) {
    if (ws.data.domains[d].name == from) src = static_cast<int>(d);
  }
  if (src < 0) throw ValidationError("unknown domain '" + from + "'");
  const auto& qrecs = ws.data.records[static_cast<std::size_t>(src)];
  const auto& grecs = ws.data.records[static_cast<std::size_t>(1 - src)];
  auto queries = retrieval::build_index(ck.state.encoder, qrecs);
  const auto gallery = retrieval::build_index(ck.state.encoder, grecs);
  if (query >= 0) {
    if (query >= queries.size()) throw ValidationError("query id " + std::to_string(query) + " out of range");
    const auto q = qrecs[static_cast<std::size_t>(query)];
    queries = retrieval::index_from_embeddings(queries.domain, queries.embeddings.row(query), std::span(&q, 1));
  }
  const auto text = retrieval::rankings_jsonl(queries, gallery, k);
  retrieval::write_text(out / "rankings.jsonl", text);
  std::cout << text;
  return 0;
}

int cmd_export(const CommonFlags& f, const std::string& ckpt, const std::string& file) {
  std::optional<trainer::Checkpoint> ck;
  Config c;
  if (!ckpt.empty()) {
    ck = open_checkpoint(ckpt, f);
    c = ck->config;
  } else {
    c = resolve_config(f);
  }
  const auto out = output_dir(f, "export-features");
  begin_run(out, c, "export-features");
  const auto ws = trainer::prepare_workspace(c);
  std::string phase = "init";
  int epoch = 0;
  std::optional<encoder::Encoder> enc;
  if (ck) {
    phase = phase_tag(*ck);
    epoch = ck->state.epoch;
    enc = ck->state.encoder;
  } else {
    trainer::Trainer tr(c, ws.data, *ws.backend, ws.tokens);
    enc = tr.initial_state().encoder;
  }
  std::ostringstream text;
  text << "# phase=" << phase << " epoch=" << epoch << " dim=" << enc->token_dim() << "\n";
  text << "domain,label";
  for (int j = 0; j < enc->token_dim(); ++j) text << ",z" << j;
  text << "\n";
  char buf[32];
  for (std::size_t d = 0; d < ws.data.records.size(); ++d) {
    const auto& recs = ws.data.records[d];
    const Matrix z = enc->encode_all(recs);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      text << ws.data.domains[d].name << ',';
      if (recs[i].label.has_value()) text << recs[i].label.read_for_evaluation();
      for (int j = 0; j < enc->token_dim(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", z(static_cast<Eigen::Index>(i), j));
        text << ',' << buf;
      }
      text << "\n";
    }
  }
  const fs::path target = file.empty() ? out / "features.csv" : fs::path(file);
  retrieval::write_text(target, text.str());
  std::cerr << "wrote " << target.string() << "\n";
  return 0;
}

int cmd_toy_bench(const CommonFlags& f) {
  Config c = resolve_config(f);
  const auto out = output_dir(f, "toy-bench");
  begin_run(out, c, "toy-bench");
  const auto report = trainer::run_toy_bench(c);
  write_json(out / "report.json", report.to_json());
  retrieval::write_text(out / "report.txt", report.to_text());
  std::cout << report.to_text();
  return 0;
}

void add_common(CLI::App* cmd, CommonFlags& f, bool with_ablate) {
  cmd->add_option("--config", f.config_path, "config file (key = value lines)");
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--out", f.out, "output directory (default $XDR_OUTPUT_ROOT/<command> or runs/<command>)");
  cmd->add_option("--set", f.sets, "override a config key, key=value");
  if (with_ablate) cmd->add_option("--ablate", f.ablate, "comma list of phases to disable: od, pa1, pa2");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised cross-domain image retrieval"};
  app.require_subcommand(1);
  CommonFlags f;
  std::string ckpt, ks, resume, from, file;
  int query = -1, top = 10;
  bool rankings = false;

  auto* train = app.add_subcommand("train", "run the OD -> PA1 -> PA2 schedule");
  add_common(train, f, true);
  train->add_option("--resume", resume, "continue from a checkpoint");

  auto* eval = app.add_subcommand("eval", "P@K in both directions for a checkpoint");
  add_common(eval, f, false);
  eval->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  eval->add_option("--k", ks, "comma list of K (default: eval_k from the config)");
  eval->add_flag("--rankings", rankings, "also write rankings.jsonl");

  auto* retrieve = app.add_subcommand("retrieve", "ranked gallery for queries of one domain");
  add_common(retrieve, f, false);
  retrieve->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  retrieve->add_option("--from", from, "query domain name")->required();
  retrieve->add_option("--query", query, "single query record id (default: all)");
  retrieve->add_option("--top", top, "hits per query")->check(CLI::PositiveNumber);

  auto* exp = app.add_subcommand("export-features", "dump embeddings with domain and label");
  add_common(exp, f, false);
  exp->add_option("--checkpoint", ckpt, "checkpoint file (default: untrained encoder)");
  exp->add_option("--file", file, "output file (default <out>/features.csv)");

  auto* bench = app.add_subcommand("toy-bench", "full pipeline vs no-OD on the toy world");
  add_common(bench, f, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) return cmd_train(f, resume);
    if (*eval) return cmd_eval(f, ckpt, ks, rankings);
    if (*retrieve) return cmd_retrieve(f, ckpt, from, query, top);
    if (*exp) return cmd_export(f, ckpt, file);
    if (*bench) return cmd_toy_bench(f);
  } catch (const CorruptArtifact& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
