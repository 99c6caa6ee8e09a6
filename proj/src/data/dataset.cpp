#include "xdr/data/dataset.hpp"

#include "xdr/core/errors.hpp"
#include "xdr/data/image_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>

namespace xdr::data {
namespace fs = std::filesystem;

namespace {

std::uint32_t file_crc32(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

std::vector<std::string> class_folders(const fs::path& root, const std::vector<std::string>& filter) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const auto name = entry.path().filename().string();
    if (!filter.empty() && std::find(filter.begin(), filter.end(), name) == filter.end()) continue;
    names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

std::map<DomainId, DomainSpec> DatasetPartition::spec_map() const {
  std::map<DomainId, DomainSpec> out;
  for (const auto& d : domains) out[d.id] = d;
  return out;
}

const std::vector<ImageRecord>& DatasetPartition::domain_records(DomainId id) const {
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (domains[i].id == id) return records.at(i);
  }
  throw LookupError("dataset has no domain " + std::to_string(id));
}

std::size_t DatasetPartition::total_records() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.size();
  return n;
}

void validate_partition(const DatasetPartition& data) {
  validate_domain_specs(data.domains);
  if (data.records.size() != data.domains.size()) throw ValidationError("record lists do not match domain list");
  for (std::size_t d = 0; d < data.domains.size(); ++d) {
    const auto& recs = data.records[d];
    if (recs.empty()) throw ValidationError("domain '" + data.domains[d].name + "' has no records");
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (recs[i].id != static_cast<RecordId>(i)) throw ValidationError("record ids must be dense per domain");
      if (recs[i].domain != data.domains[d].id) throw ValidationError("record domain does not match its list");
    }
  }
}

DomainLoad load_domain_tree(const fs::path& root, const DomainSpec& spec, const TreeOptions& options) {
  if (!fs::is_directory(root)) throw IoError("dataset path '" + root.string() + "' does not exist");
  DomainLoad load;
  load.classes = class_folders(root, options.class_filter);
  const auto& vocab = options.vocabulary.empty() ? load.classes : options.vocabulary;
  std::vector<std::pair<std::string, int>> files;  // relative path, label
  for (const auto& cls : load.classes) {
    auto it = std::find(vocab.begin(), vocab.end(), cls);
    if (it == vocab.end()) continue;
    const int label = static_cast<int>(it - vocab.begin());
    for (const auto& entry : fs::directory_iterator(root / cls)) {
      if (!entry.is_regular_file() || !has_image_extension(entry.path())) continue;
      files.emplace_back(fs::relative(entry.path(), root).generic_string(), label);
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& [rel, label] : files) {
    auto img = read_image(root / rel, options.image_size);
    if (!img) {
      load.skipped.push_back(rel);
      continue;
    }
    ImageRecord rec;
    rec.id = static_cast<RecordId>(load.records.size());
    rec.domain = spec.id;
    rec.image = std::move(*img);
    rec.label = EvalLabel(label);
    rec.source = rel;
    load.entries.push_back({rec.id, rel, label, file_crc32(root / rel)});
    load.records.push_back(std::move(rec));
  }
  for (const auto& s : load.skipped) std::cerr << "warning: skipped unreadable image " << (root / s).string() << '\n';
  if (load.records.empty()) throw ValidationError("dataset path '" + root.string() + "' contains no readable images");
  return load;
}

DatasetPartition load_tree_dataset(const Config& config, std::vector<DomainLoad>* loads) {
  std::set<std::string> vocab;
  for (const auto& d : config.domains) {
    const fs::path root = config.dataset.roots.at(d.name);
    if (!fs::is_directory(root)) throw IoError("dataset path '" + root.string() + "' does not exist");
    for (const auto& c : class_folders(root, config.dataset.class_filter)) vocab.insert(c);
  }
  TreeOptions options;
  options.image_size = config.dataset.image_size;
  options.class_filter = config.dataset.class_filter;
  options.vocabulary.assign(vocab.begin(), vocab.end());
  DatasetPartition data;
  data.domains = config.domains;
  data.classes = options.vocabulary;
  for (const auto& d : config.domains) {
    auto load = load_domain_tree(config.dataset.roots.at(d.name), d, options);
    data.records.push_back(load.records);
    if (loads) loads->push_back(std::move(load));
  }
  validate_partition(data);
  return data;
}

nlohmann::json tree_manifest(const fs::path& root, const DomainSpec& spec, const DomainLoad& load) {
  nlohmann::json doc;
  doc["root"] = root.string();
  doc["domain"] = spec.name;
  doc["classes"] = load.classes;
  doc["skipped"] = load.skipped;
  nlohmann::json entries = nlohmann::json::array();
  uLong crc = crc32(0L, Z_NULL, 0);
  for (const auto& e : load.entries) {
    entries.push_back({{"id", e.id}, {"path", e.path}, {"label", e.label}, {"crc32", e.crc32}});
    const std::string line = e.path + ':' + std::to_string(e.crc32) + '\n';
    crc = crc32(crc, reinterpret_cast<const Bytef*>(line.data()), static_cast<uInt>(line.size()));
  }
  doc["entries"] = entries;
  doc["checksum"] = static_cast<std::uint32_t>(crc);
  return doc;
}

}  // namespace xdr::data
