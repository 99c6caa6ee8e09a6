#include "xdr/encoder/bank.hpp"

#include "xdr/core/errors.hpp"

#include <cmath>

namespace xdr::encoder {

FeatureBank::FeatureBank(DomainId domain, int capacity) : domain_(domain), capacity_(capacity) {
  if (capacity < 1) throw ValidationError("bank capacity must be >= 1");
}

void FeatureBank::push(const std::vector<Embedding>& entries) {
  for (const auto& e : entries) {
    if (e.domain != domain_) {
      throw ValidationError("cannot push a domain " + std::to_string(e.domain) + " feature into the bank of domain " +
                            std::to_string(domain_));
    }
    if (std::abs(e.values.norm() - 1.0) > 1e-5) throw ValidationError("bank entries must be unit-norm");
    if (dim_ == 0) dim_ = static_cast<int>(e.values.size());
    if (e.values.size() != dim_) throw ValidationError("bank entry dimension mismatch");
  }
  for (const auto& e : entries) {
    BankEntry entry{e.record, e.values};
    if (static_cast<int>(slots_.size()) < capacity_) {
      slots_.push_back(std::move(entry));
    } else {
      slots_[cursor_] = std::move(entry);
    }
    cursor_ = (cursor_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
  }
}

const BankEntry& FeatureBank::at(int i) const {
  if (i < 0 || i >= size_) throw RangeError("bank index out of range");
  // Before the first wrap the oldest entry is slot 0; afterwards it is the cursor.
  const int start = size_ < capacity_ ? 0 : cursor_;
  return slots_[(start + i) % capacity_];
}

Matrix FeatureBank::keys() const {
  Matrix out(size_, dim_);
  for (int i = 0; i < size_; ++i) out.row(i) = at(i).values;
  return out;
}

std::vector<RecordId> FeatureBank::records() const {
  std::vector<RecordId> out;
  out.reserve(size_);
  for (int i = 0; i < size_; ++i) out.push_back(at(i).record);
  return out;
}

std::unordered_map<RecordId, int> FeatureBank::latest_positions() const {
  std::unordered_map<RecordId, int> out;
  for (int i = 0; i < size_; ++i) out[at(i).record] = i;
  return out;
}

std::optional<int> FeatureBank::find_latest(RecordId record) const {
  for (int i = size_ - 1; i >= 0; --i) {
    if (at(i).record == record) return i;
  }
  return std::nullopt;
}

FeatureBank FeatureBank::restore(DomainId domain, int capacity, int dim, int size, int cursor,
                                 std::vector<BankEntry> slots) {
  FeatureBank bank(domain, capacity);
  if (size < 0 || size > capacity || cursor < 0 || cursor >= capacity || static_cast<int>(slots.size()) != size) {
    throw CorruptArtifact("inconsistent feature bank state");
  }
  bank.dim_ = dim;
  bank.size_ = size;
  bank.cursor_ = cursor;
  bank.slots_ = std::move(slots);
  return bank;
}

bool FeatureBank::operator==(const FeatureBank& o) const {
  if (domain_ != o.domain_ || capacity_ != o.capacity_ || dim_ != o.dim_ || size_ != o.size_ || cursor_ != o.cursor_ ||
      slots_.size() != o.slots_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].record != o.slots_[i].record || slots_[i].values != o.slots_[i].values) return false;
  }
  return true;
}

}  // namespace xdr::encoder
