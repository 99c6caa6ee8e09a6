#pragma once

#include "xdr/core/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace xdr {

struct AblationFlags {
  bool use_od = true;
  bool use_pa1 = true;
  bool use_pa2 = true;

  bool operator==(const AblationFlags&) const = default;
};

struct NoiseSettings {
  std::string kind = "scaled_linear";  // linear | scaled_linear
  double beta_start = 0.00085;
  double beta_end = 0.012;

  bool operator==(const NoiseSettings&) const = default;
};

struct EncoderSettings {
  std::string backbone = "conv";  // conv | mlp
  int conv_channels = 4;
  int hidden_dim = 64;            // mlp only
  std::string activation = "tanh";  // identity | relu | tanh
  std::uint64_t init_seed = 1;

  bool operator==(const EncoderSettings&) const = default;
};

/// Parameters of the synthetic two-domain world used at desk scale.
struct ToyWorldSpec {
  int n_classes = 6;
  int samples_per_class = 16;
  int object_dim = 8;
  int style_dim = 4;
  int latent_dim = 16;
  int image_size = 6;
  int channels = 3;
  double object_jitter = 0.35;
  double style_jitter = 0.8;
  double style_gain = 3.0;
  std::uint64_t seed = 7;

  bool operator==(const ToyWorldSpec&) const = default;
};

struct DatasetSettings {
  std::string kind = "toy";  // toy | tree
  std::map<std::string, std::string> roots;  // domain name -> root directory
  std::vector<std::string> class_filter;     // empty keeps every class folder
  int image_size = 224;

  bool operator==(const DatasetSettings&) const = default;
};

struct Config {
  HyperParams hyper;
  PhaseSchedule schedule;
  std::vector<DomainSpec> domains;
  DatasetSettings dataset;
  NoiseSettings noise;
  EncoderSettings encoder;
  ToyWorldSpec toy;
  AblationFlags ablation;
  bool exclude_self = true;
  std::string augment = "default";
  std::vector<int> eval_k = {50, 100, 200};
  std::string backend = "toy";
  std::uint64_t seed = 0;

  bool operator==(const Config&) const = default;
};

/// Prompt template for a known domain name (PACS / Office-Home / DomainNet
/// naming), or an empty string if the name is not in the built-in set.
std::string default_prompt_template(const std::string& domain_name);

/// Two-domain default used when a config names no domains.
std::vector<DomainSpec> default_domains();

Config default_config();

/// Parses `key = value` lines; `#` starts a comment. Absent keys keep their
/// defaults. Throws ValidationError naming any unknown key or bad value.
Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);

/// Applies one `key = value` entry, as the file parser and CLI overrides do.
/// Does not validate cross-field invariants; call validate_config afterwards.
void apply_config_entry(Config& config, const std::string& key, const std::string& value);

void validate_config(const Config& config);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const Config& config);

/// Ordered (key, value) view of the resolved config, as written to manifests.
std::vector<std::pair<std::string, std::string>> config_entries(const Config& config);

}  // namespace xdr
