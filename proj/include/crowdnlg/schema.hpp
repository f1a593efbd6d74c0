#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crowdnlg {

enum class AttributeKind { VerbatimString, ClosedSet, Boolean, Enumerable };

std::string_view to_string(AttributeKind kind);
std::optional<AttributeKind> attribute_kind_from_string(std::string_view s);

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::VerbatimString;
  // Empty for VerbatimString; {"Yes","No"} for Boolean.
  std::vector<std::string> legal_values;
  // Candidate values the MR generator draws from for VerbatimString
  // attributes. Not a legality constraint.
  std::vector<std::string> sample_values;

  /// Returns the canonical spelling of `value` if legal for this attribute.
  /// Boolean values match case-insensitively and canonicalize to Yes/No.
  std::optional<std::string> canonical_value(std::string_view value) const;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordered set of attributes. Declaration order is the canonical order used
/// for length computations and rendering.
class DomainSchema {
 public:
  DomainSchema() = default;
  /// Throws SchemaError if any invariant is violated.
  explicit DomainSchema(std::vector<AttributeSpec> attributes);

  const std::vector<AttributeSpec>& attributes() const { return attributes_; }
  const AttributeSpec* find(std::string_view name) const;
  /// Index in declaration order, or nullopt.
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t size() const { return attributes_.size(); }

 private:
  std::vector<AttributeSpec> attributes_;
};

/// The eight-attribute restaurant domain.
DomainSchema default_schema();

DomainSchema schema_from_json(std::string_view json_text);
DomainSchema load_schema(const std::filesystem::path& path);
std::string schema_to_json(const DomainSchema& schema);

}  // namespace crowdnlg
