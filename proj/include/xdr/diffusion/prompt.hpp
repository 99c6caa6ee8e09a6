#pragma once

#include "xdr/core/types.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace xdr::diffusion {

/// Frozen word -> token-vector lookup standing in for a text encoder.
class TokenTable {
 public:
  TokenTable() = default;
  explicit TokenTable(int dim) : dim_(dim) {}

  /// Gaussian rows with std 1/sqrt(dim); words are assigned in sorted order so
  /// the result depends only on (vocabulary set, dim, seed).
  static TokenTable random(std::vector<std::string> vocabulary, int dim, std::uint64_t seed);

  int dim() const { return dim_; }
  void set(const std::string& word, Vector row);
  bool contains(const std::string& word) const { return rows_.count(word) != 0; }
  /// Throws LookupError for unknown words.
  const Vector& lookup(const std::string& word) const;
  const std::map<std::string, Vector>& rows() const { return rows_; }

  bool operator==(const TokenTable& o) const { return dim_ == o.dim_ && rows_ == o.rows_; }

 private:
  int dim_ = 0;
  std::map<std::string, Vector> rows_;
};

/// Every template word of every spec, object slot excluded.
std::vector<std::string> prompt_vocabulary(const std::vector<DomainSpec>& specs);

/// Token rows of an assembled prompt. Only the object-slot row depends on z.
struct PromptEmbedding {
  Matrix tokens;
  int object_slot = 0;

  Vector object_token() const { return tokens.row(object_slot).transpose(); }
  /// Sum of every row except the object slot.
  Vector style_token_sum() const;
};

/// Style rows come from the frozen table; the object row is exactly z.
PromptEmbedding assemble_prompt(const DomainSpec& spec, const Vector& z, const TokenTable& table);

}  // namespace xdr::diffusion
