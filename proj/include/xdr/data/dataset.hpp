#pragma once

#include "xdr/core/config.hpp"
#include "xdr/core/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace xdr::data {

/// Two or more domains with dense per-domain record ids.
struct DatasetPartition {
  std::vector<DomainSpec> domains;
  std::vector<std::vector<ImageRecord>> records;  // indexed like domains
  std::vector<std::string> classes;              // evaluation only

  std::map<DomainId, DomainSpec> spec_map() const;
  const std::vector<ImageRecord>& domain_records(DomainId id) const;
  std::size_t total_records() const;
};

/// Throws ValidationError when ids are not dense or a record's domain lacks a spec.
void validate_partition(const DatasetPartition& data);

struct TreeEntry {
  RecordId id = 0;
  std::string path;  // relative to the root
  int label = 0;
  std::uint32_t crc32 = 0;
};

struct DomainLoad {
  std::vector<ImageRecord> records;
  std::vector<std::string> classes;
  std::vector<TreeEntry> entries;
  std::vector<std::string> skipped;  // files that failed to decode
  int warnings() const { return static_cast<int>(skipped.size()); }
};

struct TreeOptions {
  int image_size = 224;
  /// Restrict to these class folders; empty keeps all.
  std::vector<std::string> class_filter;
  /// Label vocabulary shared across domains; empty uses this tree's sorted classes.
  std::vector<std::string> vocabulary;
};

/// Scans root/<class>/<image>. Record ids follow the sorted relative path.
/// Undecodable files are skipped and counted. Throws ValidationError when the
/// tree holds no usable image and IoError when root does not exist.
DomainLoad load_domain_tree(const std::filesystem::path& root, const DomainSpec& spec, const TreeOptions& options);

/// Loads every configured domain with a shared class vocabulary.
DatasetPartition load_tree_dataset(const Config& config, std::vector<DomainLoad>* loads = nullptr);

/// Scan cache: root, classes, per-entry path/id/label/crc32 and an overall checksum.
nlohmann::json tree_manifest(const std::filesystem::path& root, const DomainSpec& spec, const DomainLoad& load);

}  // namespace xdr::data
