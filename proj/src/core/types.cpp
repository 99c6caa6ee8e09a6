#include "xdr/core/types.hpp"

#include "xdr/core/errors.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace xdr {

std::vector<std::string> DomainSpec::template_tokens() const {
  std::vector<std::string> tokens;
  std::istringstream in(prompt_template);
  std::string word;
  while (in >> word) tokens.push_back(word);
  return tokens;
}

int DomainSpec::object_slot() const {
  const auto tokens = template_tokens();
  auto it = std::find(tokens.begin(), tokens.end(), kObjectSlot);
  if (it == tokens.end()) {
    throw ValidationError("prompt template '" + prompt_template + "' has no " + kObjectSlot + " slot");
  }
  return static_cast<int>(it - tokens.begin());
}

void validate_domain_spec(const DomainSpec& spec) {
  if (spec.name.empty()) throw ValidationError("domain name must not be empty");
  const auto tokens = spec.template_tokens();
  const auto slots = std::count(tokens.begin(), tokens.end(), kObjectSlot);
  if (slots != 1) {
    throw ValidationError("prompt template for domain '" + spec.name + "' must contain exactly one " +
                          kObjectSlot + " slot, found " + std::to_string(slots));
  }
  if (tokens.size() < 2) {
    throw ValidationError("prompt template for domain '" + spec.name + "' has no style words");
  }
}

void validate_domain_specs(const std::vector<DomainSpec>& specs) {
  std::set<std::string> names;
  std::set<DomainId> ids;
  for (const auto& s : specs) {
    validate_domain_spec(s);
    if (!names.insert(s.name).second) throw ValidationError("duplicate domain name '" + s.name + "'");
    if (!ids.insert(s.id).second) throw ValidationError("duplicate domain id " + std::to_string(s.id));
  }
}

int EvalLabel::read_for_evaluation() const {
  if (!value_) throw ValidationError("record has no label; evaluation requires labels");
  read_ = true;
  return *value_;
}

const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::OD: return "OD";
    case Phase::PA1: return "PA1";
    case Phase::PA2: return "PA2";
  }
  return "?";
}

}  // namespace xdr
