#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crowdnlg/schema.hpp"

namespace crowdnlg {

using AttributeValue = std::pair<std::string, std::string>;

/// An unordered attribute->value set. `pairs` carries a presentation order
/// that is ignored by equality.
struct MeaningRepresentation {
  std::string id;
  std::vector<AttributeValue> pairs;

  std::size_t complexity() const { return pairs.size(); }
  bool has(std::string_view attribute) const;
  const std::string* value_of(std::string_view attribute) const;

  /// Pairs sorted by attribute name; the set identity of the MR.
  std::vector<AttributeValue> sorted_pairs() const;
};

/// Set equality on pairs. Ids and presentation order do not participate.
bool operator==(const MeaningRepresentation& a, const MeaningRepresentation& b);

class MrError : public std::runtime_error {
 public:
  enum class Kind { MalformedSyntax, UnknownAttribute, IllegalValue, DuplicateAttribute, RuleViolation };
  MrError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Parses `attr[value], attr[value], ...`. The pair order of the result is
/// the textual order. Throws MrError.
MeaningRepresentation parse_textual_mr(std::string_view text, const DomainSchema& schema);

/// Emits the textual form with a seeded uniform shuffle of the pairs.
std::string serialize_textual_mr(const MeaningRepresentation& mr, std::uint64_t seed);

/// Textual form with pairs in the schema's declaration order.
std::string canonical_text(const MeaningRepresentation& mr, const DomainSchema& schema);

/// Pairs joined in their stored order.
std::string join_pairs(const std::vector<AttributeValue>& pairs);

/// Unicode scalar count of the textual form. Every ordering yields the same
/// count because the separators are fixed.
std::size_t mr_char_length(const MeaningRepresentation& mr);

/// Checks attributes exist, values are legal and names distinct.
void check_schema_valid(const MeaningRepresentation& mr, const DomainSchema& schema);

/// Elicitation rules on top of schema validity: complexity in {3,5,8} and
/// the 3- and 5-attribute MRs must contain `name`.
void check_elicitation_rules(const MeaningRepresentation& mr, const DomainSchema& schema);

}  // namespace crowdnlg
