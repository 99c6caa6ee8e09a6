#include "xdr/core/config.hpp"

#include "xdr/core/errors.hpp"
#include "xdr/core/phase.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace xdr {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ValidationError("config key '" + key + "': cannot parse '" + value + "' as a number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ValidationError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out << ',';
    out << items[i];
  }
  return out.str();
}

struct Field {
  const char* key;
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&, const std::string&)> set;
};

#define XDR_INT_FIELD(name, member)                                                                    \
  Field {                                                                                              \
    name, [](const Config& c) { return std::to_string(c.member); },                                    \
        [](Config& c, const std::string& k, const std::string& v) { c.member = parse_number<int>(k, v); } \
  }
#define XDR_U64_FIELD(name, member)                                                                    \
  Field {                                                                                              \
    name, [](const Config& c) { return std::to_string(c.member); },                                    \
        [](Config& c, const std::string& k, const std::string& v) {                                    \
          c.member = parse_number<std::uint64_t>(k, v);                                                \
        }                                                                                              \
  }
#define XDR_DOUBLE_FIELD(name, member)                                                                 \
  Field {                                                                                              \
    name, [](const Config& c) { return format_double(c.member); },                                     \
        [](Config& c, const std::string& k, const std::string& v) { c.member = parse_number<double>(k, v); } \
  }
#define XDR_BOOL_FIELD(name, member)                                                                   \
  Field {                                                                                              \
    name, [](const Config& c) { return std::string(c.member ? "true" : "false"); },                    \
        [](Config& c, const std::string& k, const std::string& v) { c.member = parse_bool(k, v); }     \
  }
#define XDR_STRING_FIELD(name, member)                                                                 \
  Field {                                                                                              \
    name, [](const Config& c) { return c.member; },                                                    \
        [](Config& c, const std::string&, const std::string& v) { c.member = v; }                      \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      XDR_DOUBLE_FIELD("tau", hyper.tau),
      XDR_INT_FIELD("k", hyper.k),
      XDR_DOUBLE_FIELD("beta", hyper.beta),
      XDR_DOUBLE_FIELD("lambda", hyper.lambda),
      XDR_DOUBLE_FIELD("eps_div", hyper.eps_div),
      XDR_DOUBLE_FIELD("momentum", hyper.momentum_m),
      XDR_INT_FIELD("bank_capacity", hyper.bank_capacity),
      XDR_INT_FIELD("diffusion_steps", hyper.diffusion_steps),
      XDR_DOUBLE_FIELD("learning_rate", hyper.learning_rate),
      XDR_INT_FIELD("batch_size", hyper.batch_size),
      XDR_INT_FIELD("od_epochs", schedule.od_epochs),
      XDR_INT_FIELD("pa1_epochs", schedule.pa1_epochs),
      XDR_INT_FIELD("pa2_epochs", schedule.pa2_epochs),
      XDR_BOOL_FIELD("use_od", ablation.use_od),
      XDR_BOOL_FIELD("use_pa1", ablation.use_pa1),
      XDR_BOOL_FIELD("use_pa2", ablation.use_pa2),
      XDR_BOOL_FIELD("exclude_self", exclude_self),
      XDR_STRING_FIELD("noise_schedule", noise.kind),
      XDR_DOUBLE_FIELD("noise_beta_start", noise.beta_start),
      XDR_DOUBLE_FIELD("noise_beta_end", noise.beta_end),
      XDR_STRING_FIELD("augment", augment),
      Field{"eval_k", [](const Config& c) { return join(c.eval_k); },
            [](Config& c, const std::string& k, const std::string& v) {
              c.eval_k.clear();
              for (const auto& item : split_list(v)) c.eval_k.push_back(parse_number<int>(k, item));
            }},
      XDR_STRING_FIELD("backend", backend),
      XDR_U64_FIELD("seed", seed),
      XDR_STRING_FIELD("dataset", dataset.kind),
      XDR_INT_FIELD("image_size", dataset.image_size),
      Field{"class_filter", [](const Config& c) { return join(c.dataset.class_filter); },
            [](Config& c, const std::string&, const std::string& v) { c.dataset.class_filter = split_list(v); }},
      XDR_STRING_FIELD("encoder.backbone", encoder.backbone),
      XDR_INT_FIELD("encoder.conv_channels", encoder.conv_channels),
      XDR_INT_FIELD("encoder.hidden_dim", encoder.hidden_dim),
      XDR_STRING_FIELD("encoder.activation", encoder.activation),
      XDR_U64_FIELD("encoder.init_seed", encoder.init_seed),
      XDR_INT_FIELD("toy.classes", toy.n_classes),
      XDR_INT_FIELD("toy.samples_per_class", toy.samples_per_class),
      XDR_INT_FIELD("toy.object_dim", toy.object_dim),
      XDR_INT_FIELD("toy.style_dim", toy.style_dim),
      XDR_INT_FIELD("toy.latent_dim", toy.latent_dim),
      XDR_INT_FIELD("toy.image_size", toy.image_size),
      XDR_INT_FIELD("toy.channels", toy.channels),
      XDR_DOUBLE_FIELD("toy.object_jitter", toy.object_jitter),
      XDR_DOUBLE_FIELD("toy.style_jitter", toy.style_jitter),
      XDR_DOUBLE_FIELD("toy.style_gain", toy.style_gain),
      XDR_U64_FIELD("toy.seed", toy.seed),
  };
  return table;
}

DomainSpec& domain_named(Config& c, const std::string& name) {
  auto it = std::find_if(c.domains.begin(), c.domains.end(), [&](const DomainSpec& d) { return d.name == name; });
  if (it != c.domains.end()) return *it;
  DomainSpec spec;
  spec.id = static_cast<DomainId>(c.domains.size());
  spec.name = name;
  spec.prompt_template = default_prompt_template(name);
  c.domains.push_back(spec);
  return c.domains.back();
}

void set_domain_list(Config& c, const std::string& value) {
  c.domains.clear();
  const auto names = split_list(value);
  for (const auto& name : names) domain_named(c, name);
  std::erase_if(c.dataset.roots, [&](const auto& kv) {
    return std::find(names.begin(), names.end(), kv.first) == names.end();
  });
}

}  // namespace

std::string default_prompt_template(const std::string& name) {
  static const std::map<std::string, std::string> prompts = {
      {"art_painting", "a painting of a {object}"}, {"painting", "a painting of a {object}"},
      {"art", "a painting of a {object}"},          {"cartoon", "a cartoon of a {object}"},
      {"photo", "a photo of a {object}"},           {"real", "a photo of a {object}"},
      {"sketch", "a sketch of a {object}"},         {"clipart", "a clipart of a {object}"},
      {"product", "a product photo of a {object}"}, {"infograph", "an infograph of a {object}"},
  };
  std::string key = name;
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) {
    return ch == ' ' || ch == '-' ? '_' : static_cast<char>(std::tolower(ch));
  });
  auto it = prompts.find(key);
  return it == prompts.end() ? std::string() : it->second;
}

std::vector<DomainSpec> default_domains() {
  return {DomainSpec{0, "photo", "a photo of a {object}"}, DomainSpec{1, "sketch", "a sketch of a {object}"}};
}

Config default_config() {
  Config c;
  c.domains = default_domains();
  return c;
}

void apply_config_entry(Config& c, const std::string& key, const std::string& value) {
  if (key == "domains") {
    set_domain_list(c, value);
    return;
  }
  if (key.rfind("domain.", 0) == 0) {
    const auto rest = key.substr(7);
    const auto dot = rest.rfind('.');
    if (dot == std::string::npos || dot == 0) throw ValidationError("unknown config key '" + key + "'");
    const auto name = rest.substr(0, dot);
    const auto field = rest.substr(dot + 1);
    if (field == "template") {
      domain_named(c, name).prompt_template = value;
    } else if (field == "path") {
      domain_named(c, name);
      c.dataset.roots[name] = value;
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
    return;
  }
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(c, key, value);
      return;
    }
  }
  throw ValidationError("unknown config key '" + key + "'");
}

Config parse_config(const std::string& text) {
  Config c = default_config();
  bool domains_from_file = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const bool is_domain_key = key == "domains" || key.rfind("domain.", 0) == 0;
    if (is_domain_key && !domains_from_file) {
      c.domains.clear();
      domains_from_file = true;
    }
    apply_config_entry(c, key, value);
  }
  validate_config(c);
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate_config(const Config& c) {
  const auto& h = c.hyper;
  if (!(h.tau > 0)) throw ValidationError("tau must be > 0");
  if (h.k < 1) throw ValidationError("k must be ≥ 1");
  if (!(h.beta >= 0)) throw ValidationError("beta must be ≥ 0");
  if (!(h.lambda >= 0)) throw ValidationError("lambda must be ≥ 0");
  if (!(h.eps_div > 0)) throw ValidationError("eps_div must be > 0");
  if (!(h.momentum_m >= 0 && h.momentum_m < 1)) throw ValidationError("momentum must be in [0, 1)");
  if (h.bank_capacity < 1) throw ValidationError("bank_capacity must be ≥ 1");
  if (h.diffusion_steps < 1) throw ValidationError("diffusion_steps must be ≥ 1");
  if (!(h.learning_rate >= 0)) throw ValidationError("learning_rate must be ≥ 0");
  if (h.batch_size < 1) throw ValidationError("batch_size must be ≥ 1");
  validate_schedule(c.schedule);
  if (c.noise.kind != "linear" && c.noise.kind != "scaled_linear") {
    throw ValidationError("noise_schedule must be 'linear' or 'scaled_linear'");
  }
  if (c.dataset.kind != "toy" && c.dataset.kind != "tree") throw ValidationError("dataset must be 'toy' or 'tree'");
  if (c.dataset.image_size < 1) throw ValidationError("image_size must be ≥ 1");
  if (c.encoder.backbone != "conv" && c.encoder.backbone != "mlp") {
    throw ValidationError("encoder.backbone must be 'conv' or 'mlp'");
  }
  if (c.encoder.activation != "identity" && c.encoder.activation != "relu" && c.encoder.activation != "tanh") {
    throw ValidationError("encoder.activation must be identity, relu or tanh");
  }
  if (c.encoder.conv_channels < 1 || c.encoder.hidden_dim < 1) throw ValidationError("encoder widths must be ≥ 1");
  if (c.backend != "toy") throw ValidationError("backend '" + c.backend + "' is not available (only 'toy' ships)");
  if (c.eval_k.empty()) throw ValidationError("eval_k must list at least one K");
  for (int k : c.eval_k) {
    if (k < 1) throw ValidationError("eval_k entries must be ≥ 1");
  }
  if (!c.ablation.use_od && !c.ablation.use_pa1 && !c.ablation.use_pa2) {
    throw ValidationError("at least one of use_od, use_pa1, use_pa2 must be enabled");
  }
  const auto& t = c.toy;
  if (t.n_classes < 1 || t.samples_per_class < 1 || t.object_dim < 1 || t.style_dim < 1 || t.image_size < 1 ||
      t.channels < 1) {
    throw ValidationError("toy world dimensions and counts must be ≥ 1");
  }
  if (t.latent_dim < t.object_dim + t.style_dim) {
    throw ValidationError("toy.latent_dim must be ≥ toy.object_dim + toy.style_dim");
  }
  if (t.image_size * t.image_size * t.channels < t.object_dim + t.style_dim) {
    throw ValidationError("toy images have fewer pixels than object_dim + style_dim");
  }
  if (c.domains.size() != 2) throw ValidationError("exactly two domains are required");
  for (std::size_t i = 0; i < c.domains.size(); ++i) {
    if (c.domains[i].prompt_template.empty()) {
      throw ValidationError("domain '" + c.domains[i].name + "' needs domain." + c.domains[i].name + ".template");
    }
    if (c.domains[i].id != static_cast<DomainId>(i)) throw ValidationError("domain ids must follow list order");
  }
  validate_domain_specs(c.domains);
  if (c.dataset.kind == "tree") {
    for (const auto& d : c.domains) {
      if (!c.dataset.roots.count(d.name)) {
        throw ValidationError("dataset=tree requires domain." + d.name + ".path");
      }
    }
  }
}

std::vector<std::pair<std::string, std::string>> config_entries(const Config& c) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(c));
  std::vector<std::string> names;
  for (const auto& d : c.domains) names.push_back(d.name);
  out.emplace_back("domains", join(names));
  for (const auto& d : c.domains) {
    out.emplace_back("domain." + d.name + ".template", d.prompt_template);
    if (auto it = c.dataset.roots.find(d.name); it != c.dataset.roots.end()) {
      out.emplace_back("domain." + d.name + ".path", it->second);
    }
  }
  return out;
}

std::string serialize_config(const Config& c) {
  std::ostringstream out;
  for (const auto& [k, v] : config_entries(c)) out << k << " = " << v << '\n';
  return out.str();
}

}  // namespace xdr
