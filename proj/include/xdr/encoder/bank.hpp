#pragma once

#include "xdr/core/types.hpp"

#include <optional>
#include <unordered_map>
#include <vector>

namespace xdr::encoder {

struct BankEntry {
  RecordId record = 0;
  Vector values;
};

/// Fixed-capacity FIFO of momentum features for one domain.
class FeatureBank {
 public:
  FeatureBank(DomainId domain, int capacity);

  DomainId domain() const { return domain_; }
  int capacity() const { return capacity_; }
  int size() const { return size_; }
  bool empty() const { return size_ == 0; }
  int dim() const { return dim_; }

  /// Appends in order, evicting the oldest entries once full. Throws
  /// ValidationError for entries of another domain, non-unit norm, or a
  /// dimension different from earlier entries.
  void push(const std::vector<Embedding>& entries);

  /// i-th entry counting from the oldest.
  const BankEntry& at(int i) const;
  /// All stored vectors, oldest first.
  Matrix keys() const;
  std::vector<RecordId> records() const;
  /// Position (oldest-first) of the newest entry for each resident record.
  std::unordered_map<RecordId, int> latest_positions() const;
  std::optional<int> find_latest(RecordId record) const;

  // Raw ring state, for checkpointing.
  int cursor() const { return cursor_; }
  const std::vector<BankEntry>& slots() const { return slots_; }
  static FeatureBank restore(DomainId domain, int capacity, int dim, int size, int cursor, std::vector<BankEntry> slots);

  bool operator==(const FeatureBank&) const;

 private:
  DomainId domain_;
  int capacity_;
  int dim_ = 0;
  int size_ = 0;
  int cursor_ = 0;  // next slot to write
  std::vector<BankEntry> slots_;
};

}  // namespace xdr::encoder
