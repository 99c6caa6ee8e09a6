#include "xdr/core/manifest.hpp"

#include "xdr/core/errors.hpp"

#include <fstream>

namespace xdr {

std::string ablation_row(const AblationFlags& f) {
  std::string row;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!row.empty()) row += '+';
    row += name;
  };
  add(f.use_od, "OD");
  add(f.use_pa1, "PA1");
  add(f.use_pa2, "PA2");
  return row.empty() ? "none" : row;
}

nlohmann::json make_manifest(const Config& config, const std::string& command) {
  nlohmann::json doc;
  doc["tool"] = "xdr";
  doc["version"] = kToolVersion;
  doc["command"] = command;
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [k, v] : config_entries(config)) entries[k] = v;
  doc["config"] = entries;
  doc["seeds"] = {{"run", config.seed}, {"toy_world", config.toy.seed}, {"encoder_init", config.encoder.init_seed}};
  doc["ablation"] = {{"row", ablation_row(config.ablation)},
                     {"use_od", config.ablation.use_od},
                     {"use_pa1", config.ablation.use_pa1},
                     {"use_pa2", config.ablation.use_pa2}};
  doc["adopted_defaults"] = {
      {"momentum", "MoCo default 0.999 (value not reported by the method)"},
      {"bank_capacity", "MoCo-style default 4096 (value not reported by the method)"},
      {"eps_div", "1e-8"},
      {"timestep_sampling", "uniform on {1..T}, drawn per sample"},
      {"aug_loss_denominator", "mini-batch of the same domain"},
      {"banks_at_phase_transition", "retained"},
      {"empty_bank_at_alignment_start", "filled from the momentum feature table"},
      {"optimizer", "Adam(beta1=0.9, beta2=0.999, eps=1e-8), weight decay 0"},
      {"augmentation", config.augment},
  };
  return doc;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace xdr
