#include "xdr/trainer/checkpoint.hpp"

#include "xdr/core/errors.hpp"

#include <json.hpp>
#include <zlib.h>

#include <cstring>
#include <fstream>
#include <sstream>

namespace xdr::trainer {
namespace {

constexpr char kMagic[8] = {'X', 'D', 'R', 'C', 'K', 'P', 'T', '\n'};

using nlohmann::json;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t at) {
  if (at + sizeof(T) > in.size()) throw CorruptArtifact("checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + at, sizeof(T));
  return v;
}

std::uint32_t crc_of(const char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

struct Payload {
  std::vector<double> data;
  json sections = json::array();

  void add(const std::string& name, std::span<const double> values) {
    sections.push_back({{"name", name}, {"offset", data.size()}, {"count", values.size()}});
    data.insert(data.end(), values.begin(), values.end());
  }
  void add(const std::string& name, const Matrix& m) {
    add(name, std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
  }
};

struct Sections {
  const json& table;
  const std::vector<double>& data;

  std::span<const double> get(const std::string& name, std::size_t expected) const {
    for (const auto& s : table) {
      if (s.at("name") != name) continue;
      const auto off = s.at("offset").get<std::size_t>();
      const auto n = s.at("count").get<std::size_t>();
      if (n != expected || off + n > data.size()) throw CorruptArtifact("checkpoint section '" + name + "' has bad size");
      return {data.data() + off, n};
    }
    throw CorruptArtifact("checkpoint section '" + name + "' missing");
  }
};

Phase phase_from(const std::string& name) {
  for (Phase p : {Phase::OD, Phase::PA1, Phase::PA2}) {
    if (name == phase_name(p)) return p;
  }
  throw CorruptArtifact("unknown phase '" + name + "'");
}

void copy_into(std::span<double> dst, std::span<const double> src) { std::copy(src.begin(), src.end(), dst.begin()); }

}  // namespace

std::string checkpoint_bytes(const TrainState& s, const Config& config) {
  Payload p;
  json h;
  h["format"] = "xdr-checkpoint";
  h["config"] = serialize_config(config);
  h["epoch"] = s.epoch;
  h["phase"] = phase_name(s.phase);
  h["arch"] = encoder::arch_to_json(s.encoder.arch());
  h["rng"] = rng_state(s.rng);
  p.add("encoder", s.encoder.parameters());
  h["momentum"] = nullptr;
  if (s.momentum) {
    h["momentum"] = {{"m", s.momentum->m}};
    p.add("momentum", s.momentum->net.parameters());
  }
  h["adam"] = {{"lr", s.adam.lr}, {"beta1", s.adam.beta1}, {"beta2", s.adam.beta2}, {"eps", s.adam.eps},
               {"step", s.adam.step}};
  p.add("adam_m", s.adam.m);
  p.add("adam_v", s.adam.v);
  h["banks"] = json::array();
  for (std::size_t d = 0; d < s.banks.size(); ++d) {
    const auto& b = s.banks[d];
    json records = json::array();
    std::vector<double> values;
    for (const auto& e : b.slots()) {
      records.push_back(e.record);
      values.insert(values.end(), e.values.data(), e.values.data() + e.values.size());
    }
    h["banks"].push_back({{"domain", b.domain()},
                          {"capacity", b.capacity()},
                          {"dim", b.dim()},
                          {"size", b.size()},
                          {"cursor", b.cursor()},
                          {"records", records}});
    p.add("bank_" + std::to_string(d), values);
  }
  h["tables"] = json::array();
  for (std::size_t d = 0; d < s.tables.size(); ++d) {
    const auto& t = s.tables[d];
    h["tables"].push_back({{"domain", t.domain}, {"epoch", t.epoch}, {"rows", t.rows.rows()}, {"cols", t.rows.cols()}});
    p.add("table_" + std::to_string(d), t.rows);
  }
  h["in_adjacency"] = json::array();
  for (const auto& a : s.in_adjacency) h["in_adjacency"].push_back(a.to_text());
  h["cross_adjacency"] = s.cross_adjacency ? json(s.cross_adjacency->to_text()) : json(nullptr);
  h["sections"] = p.sections;

  const std::string header = h.dump();
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, header.size());
  out += header;
  put<std::uint64_t>(out, p.data.size());
  out.append(reinterpret_cast<const char*>(p.data.data()), p.data.size() * sizeof(double));
  put<std::uint32_t>(out, crc_of(out.data(), out.size()));
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state, const Config& config) {
  const auto bytes = checkpoint_bytes(state, config);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint parse_checkpoint(const std::string& in) {
  if (in.size() < sizeof(kMagic) + 4 + 8 + 8 + 4 || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CorruptArtifact("not a checkpoint (bad magic)");
  }
  const auto stored_crc = get<std::uint32_t>(in, in.size() - 4);
  if (crc_of(in.data(), in.size() - 4) != stored_crc) throw CorruptArtifact("checkpoint checksum mismatch");
  std::size_t at = sizeof(kMagic);
  const auto version = get<std::uint32_t>(in, at);
  at += 4;
  if (version != kCheckpointVersion) throw CorruptArtifact("unsupported checkpoint version " + std::to_string(version));
  const auto header_len = get<std::uint64_t>(in, at);
  at += 8;
  if (at + header_len > in.size()) throw CorruptArtifact("checkpoint truncated");
  json h;
  try {
    h = json::parse(in.substr(at, header_len));
  } catch (const json::exception& e) {
    throw CorruptArtifact(std::string("checkpoint header: ") + e.what());
  }
  at += header_len;
  const auto count = get<std::uint64_t>(in, at);
  at += 8;
  if (at + count * sizeof(double) + 4 != in.size()) throw CorruptArtifact("checkpoint payload size mismatch");
  std::vector<double> data(count);
  std::memcpy(data.data(), in.data() + at, count * sizeof(double));

  try {
    if (h.at("format") != "xdr-checkpoint") throw CorruptArtifact("unknown checkpoint format");
    Sections sec{h.at("sections"), data};
    Config config = parse_config(h.at("config").get<std::string>());
    const auto arch = encoder::arch_from_json(h.at("arch"));
    encoder::Encoder enc(arch, 0);
    copy_into(enc.parameters(), sec.get("encoder", enc.parameter_count()));

    TrainState s{h.at("epoch").get<int>(), phase_from(h.at("phase").get<std::string>()), enc, std::nullopt,
                 {}, {}, {}, std::nullopt, {}, rng_from_state(h.at("rng").get<std::string>())};
    if (!h.at("momentum").is_null()) {
      encoder::MomentumEncoder m{enc, h.at("momentum").at("m").get<double>()};
      copy_into(m.net.parameters(), sec.get("momentum", enc.parameter_count()));
      s.momentum = std::move(m);
    }
    const auto& ha = h.at("adam");
    s.adam.lr = ha.at("lr");
    s.adam.beta1 = ha.at("beta1");
    s.adam.beta2 = ha.at("beta2");
    s.adam.eps = ha.at("eps");
    s.adam.step = ha.at("step");
    auto m = sec.get("adam_m", enc.parameter_count());
    auto v = sec.get("adam_v", enc.parameter_count());
    s.adam.m.assign(m.begin(), m.end());
    s.adam.v.assign(v.begin(), v.end());

    const auto& banks = h.at("banks");
    for (std::size_t d = 0; d < banks.size(); ++d) {
      const auto& b = banks[d];
      const int dim = b.at("dim"), size = b.at("size");
      const auto records = b.at("records").get<std::vector<RecordId>>();
      if (static_cast<int>(records.size()) != size) throw CorruptArtifact("bank record count mismatch");
      const auto values = sec.get("bank_" + std::to_string(d), static_cast<std::size_t>(dim) * size);
      std::vector<encoder::BankEntry> slots;
      for (int i = 0; i < size; ++i) {
        Vector vec(dim);
        std::copy_n(values.data() + static_cast<std::size_t>(i) * dim, dim, vec.data());
        slots.push_back({records[static_cast<std::size_t>(i)], std::move(vec)});
      }
      s.banks.push_back(encoder::FeatureBank::restore(b.at("domain"), b.at("capacity"), dim, size, b.at("cursor"),
                                                      std::move(slots)));
    }
    const auto& tables = h.at("tables");
    for (std::size_t d = 0; d < tables.size(); ++d) {
      const auto& t = tables[d];
      encoder::FullFeatureTable ft;
      ft.domain = t.at("domain");
      ft.epoch = t.at("epoch");
      const Eigen::Index rows = t.at("rows"), cols = t.at("cols");
      const auto vals = sec.get("table_" + std::to_string(d), static_cast<std::size_t>(rows * cols));
      ft.rows.resize(rows, cols);
      std::copy(vals.begin(), vals.end(), ft.rows.data());
      s.tables.push_back(std::move(ft));
    }
    for (const auto& a : h.at("in_adjacency")) s.in_adjacency.push_back(alignment::MutualAdjacency::from_text(a));
    if (!h.at("cross_adjacency").is_null()) {
      s.cross_adjacency = alignment::MutualAdjacency::from_text(h.at("cross_adjacency").get<std::string>());
    }
    return {std::move(config), std::move(s)};
  } catch (const json::exception& e) {
    throw CorruptArtifact(std::string("checkpoint header: ") + e.what());
  } catch (const ValidationError& e) {
    throw CorruptArtifact(std::string("checkpoint content: ") + e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace xdr::trainer
