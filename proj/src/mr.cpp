#include "crowdnlg/mr.hpp"

#include <algorithm>
#include <set>

#include "crowdnlg/rng.hpp"
#include "crowdnlg/text.hpp"

namespace crowdnlg {

bool MeaningRepresentation::has(std::string_view attribute) const {
  return value_of(attribute) != nullptr;
}

const std::string* MeaningRepresentation::value_of(std::string_view attribute) const {
  for (const auto& [attr, value] : pairs) {
    if (attr == attribute) return &value;
  }
  return nullptr;
}

std::vector<AttributeValue> MeaningRepresentation::sorted_pairs() const {
  auto sorted = pairs;
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

bool operator==(const MeaningRepresentation& a, const MeaningRepresentation& b) {
  return a.pairs.size() == b.pairs.size() && a.sorted_pairs() == b.sorted_pairs();
}

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  if (!alpha(s[0])) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) {
    return alpha(c) || (c >= '0' && c <= '9') || c == '_';
  });
}

[[noreturn]] void malformed(std::string_view text, std::size_t pos, const std::string& why) {
  throw MrError(MrError::Kind::MalformedSyntax,
                "malformed MR at offset " + std::to_string(pos) + ": " + why + " in \"" +
                    std::string(text) + "\"");
}

}  // namespace

MeaningRepresentation parse_textual_mr(std::string_view text, const DomainSchema& schema) {
  if (text.empty()) malformed(text, 0, "empty input");
  MeaningRepresentation mr;
  std::set<std::string, std::less<>> seen;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find('[', pos);
    if (open == std::string_view::npos) malformed(text, pos, "expected '['");
    const auto attr = text.substr(pos, open - pos);
    if (!is_identifier(attr)) malformed(text, pos, "expected attribute name");
    const auto close = text.find(']', open + 1);
    if (close == std::string_view::npos) malformed(text, open, "unbalanced '['");
    const auto value = text.substr(open + 1, close - open - 1);
    if (value.find('[') != std::string_view::npos) malformed(text, open, "nested '['");
    if (value.empty()) malformed(text, open, "empty value");

    const auto* spec = schema.find(attr);
    if (spec == nullptr) {
      throw MrError(MrError::Kind::UnknownAttribute, "unknown attribute '" + std::string(attr) + "'");
    }
    if (!seen.insert(std::string(attr)).second) {
      throw MrError(MrError::Kind::DuplicateAttribute,
                    "attribute '" + std::string(attr) + "' appears more than once");
    }
    auto canonical = spec->canonical_value(value);
    if (!canonical) {
      throw MrError(MrError::Kind::IllegalValue,
                    "value '" + std::string(value) + "' is not legal for '" + std::string(attr) + "'");
    }
    mr.pairs.emplace_back(std::string(attr), std::move(*canonical));

    pos = close + 1;
    if (pos == text.size()) break;
    if (text.substr(pos, 2) != ", ") malformed(text, pos, "expected \", \" separator");
    pos += 2;
    if (pos == text.size()) malformed(text, pos, "trailing separator");
  }
  return mr;
}

std::string join_pairs(const std::vector<AttributeValue>& pairs) {
  std::string out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i > 0) out += ", ";
    out += pairs[i].first;
    out += '[';
    out += pairs[i].second;
    out += ']';
  }
  return out;
}

std::string serialize_textual_mr(const MeaningRepresentation& mr, std::uint64_t seed) {
  // Shuffle from the set identity, not the stored order, so the output
  // depends only on (pair set, seed).
  auto pairs = mr.sorted_pairs();
  Rng rng(seed);
  rng.shuffle(std::span<AttributeValue>(pairs));
  return join_pairs(pairs);
}

std::string canonical_text(const MeaningRepresentation& mr, const DomainSchema& schema) {
  auto pairs = mr.pairs;
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
    return schema.index_of(a.first).value_or(schema.size()) <
           schema.index_of(b.first).value_or(schema.size());
  });
  return join_pairs(pairs);
}

std::size_t mr_char_length(const MeaningRepresentation& mr) {
  return text::code_point_count(join_pairs(mr.pairs));
}

void check_schema_valid(const MeaningRepresentation& mr, const DomainSchema& schema) {
  std::set<std::string> seen;
  for (const auto& [attr, value] : mr.pairs) {
    const auto* spec = schema.find(attr);
    if (spec == nullptr) {
      throw MrError(MrError::Kind::UnknownAttribute, "unknown attribute '" + attr + "'");
    }
    if (!seen.insert(attr).second) {
      throw MrError(MrError::Kind::DuplicateAttribute, "attribute '" + attr + "' appears more than once");
    }
    const auto canonical = spec->canonical_value(value);
    if (!canonical || *canonical != value) {
      throw MrError(MrError::Kind::IllegalValue, "value '" + value + "' is not legal for '" + attr + "'");
    }
  }
}

void check_elicitation_rules(const MeaningRepresentation& mr, const DomainSchema& schema) {
  check_schema_valid(mr, schema);
  const auto n = mr.complexity();
  if (n != 3 && n != 5 && n != 8) {
    throw MrError(MrError::Kind::RuleViolation,
                  "MR " + mr.id + " has " + std::to_string(n) + " attributes; expected 3, 5 or 8");
  }
  if ((n == 3 || n == 5) && !mr.has("name")) {
    throw MrError(MrError::Kind::RuleViolation,
                  "MR " + mr.id + " with " + std::to_string(n) + " attributes lacks 'name'");
  }
}

}  // namespace crowdnlg
