#include "xdr/diffusion/prompt.hpp"

#include "xdr/core/errors.hpp"
#include "xdr/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace xdr::diffusion {

TokenTable TokenTable::random(std::vector<std::string> vocabulary, int dim, std::uint64_t seed) {
  if (dim < 1) throw ValidationError("token dimension must be >= 1");
  std::sort(vocabulary.begin(), vocabulary.end());
  vocabulary.erase(std::unique(vocabulary.begin(), vocabulary.end()), vocabulary.end());
  TokenTable table(dim);
  Rng rng(seed);
  for (const auto& w : vocabulary) table.set(w, standard_normal(rng, dim) / std::sqrt(static_cast<double>(dim)));
  return table;
}

void TokenTable::set(const std::string& word, Vector row) {
  if (row.size() != dim_) throw ValidationError("token row for '" + word + "' has wrong dimension");
  rows_[word] = std::move(row);
}

const Vector& TokenTable::lookup(const std::string& word) const {
  auto it = rows_.find(word);
  if (it == rows_.end()) throw LookupError("token table has no entry for '" + word + "'");
  return it->second;
}

std::vector<std::string> prompt_vocabulary(const std::vector<DomainSpec>& specs) {
  std::set<std::string> words;
  for (const auto& s : specs) {
    for (const auto& w : s.template_tokens()) {
      if (w != kObjectSlot) words.insert(w);
    }
  }
  return {words.begin(), words.end()};
}

Vector PromptEmbedding::style_token_sum() const {
  Vector sum = Vector::Zero(tokens.cols());
  for (Eigen::Index r = 0; r < tokens.rows(); ++r) {
    if (r != object_slot) sum += tokens.row(r).transpose();
  }
  return sum;
}

PromptEmbedding assemble_prompt(const DomainSpec& spec, const Vector& z, const TokenTable& table) {
  if (z.size() != table.dim()) {
    throw ValidationError("object token has dimension " + std::to_string(z.size()) + ", prompt tokens need " +
                          std::to_string(table.dim()));
  }
  validate_domain_spec(spec);
  const auto words = spec.template_tokens();
  PromptEmbedding prompt;
  prompt.tokens.resize(static_cast<Eigen::Index>(words.size()), table.dim());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] == kObjectSlot) {
      prompt.object_slot = static_cast<int>(i);
      prompt.tokens.row(static_cast<Eigen::Index>(i)) = z.transpose();
    } else {
      prompt.tokens.row(static_cast<Eigen::Index>(i)) = table.lookup(words[i]).transpose();
    }
  }
  return prompt;
}

}  // namespace xdr::diffusion
