#include "crowdnlg/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crowdnlg/text.hpp"

namespace crowdnlg {

using nlohmann::json;

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::VerbatimString: return "verbatim";
    case AttributeKind::ClosedSet: return "closed_set";
    case AttributeKind::Boolean: return "boolean";
    case AttributeKind::Enumerable: return "enumerable";
  }
  return "verbatim";
}

std::optional<AttributeKind> attribute_kind_from_string(std::string_view s) {
  if (s == "verbatim") return AttributeKind::VerbatimString;
  if (s == "closed_set") return AttributeKind::ClosedSet;
  if (s == "boolean") return AttributeKind::Boolean;
  if (s == "enumerable") return AttributeKind::Enumerable;
  return std::nullopt;
}

std::optional<std::string> AttributeSpec::canonical_value(std::string_view value) const {
  switch (kind) {
    case AttributeKind::VerbatimString:
      if (value.empty() || value.find_first_of("[]") != std::string_view::npos) {
        return std::nullopt;
      }
      return std::string(value);
    case AttributeKind::Boolean: {
      const auto folded = text::fold_case(value);
      if (folded == "yes") return "Yes";
      if (folded == "no") return "No";
      return std::nullopt;
    }
    case AttributeKind::ClosedSet:
    case AttributeKind::Enumerable:
      for (const auto& legal : legal_values) {
        if (legal == value) return legal;
      }
      return std::nullopt;
  }
  return std::nullopt;
}

DomainSchema::DomainSchema(std::vector<AttributeSpec> attributes)
    : attributes_(std::move(attributes)) {
  std::set<std::string> names;
  for (auto& spec : attributes_) {
    if (spec.name.empty()) throw SchemaError("attribute with empty name");
    if (!names.insert(spec.name).second) {
      throw SchemaError("duplicate attribute '" + spec.name + "'");
    }
    switch (spec.kind) {
      case AttributeKind::VerbatimString:
        if (!spec.legal_values.empty()) {
          throw SchemaError("verbatim attribute '" + spec.name + "' must not list legal values");
        }
        break;
      case AttributeKind::Boolean:
        if (spec.legal_values.empty()) spec.legal_values = {"Yes", "No"};
        if (spec.legal_values != std::vector<std::string>{"Yes", "No"}) {
          throw SchemaError("boolean attribute '" + spec.name + "' must have values Yes, No");
        }
        break;
      case AttributeKind::ClosedSet:
      case AttributeKind::Enumerable: {
        if (spec.legal_values.empty()) {
          throw SchemaError("attribute '" + spec.name + "' needs at least one legal value");
        }
        std::set<std::string> seen;
        for (const auto& v : spec.legal_values) {
          if (v.empty() || v.find_first_of("[]") != std::string::npos) {
            throw SchemaError("attribute '" + spec.name + "' has unrepresentable value '" + v + "'");
          }
          if (!seen.insert(v).second) {
            throw SchemaError("attribute '" + spec.name + "' lists '" + v + "' twice");
          }
        }
        break;
      }
    }
  }
}

const AttributeSpec* DomainSchema::find(std::string_view name) const {
  for (const auto& spec : attributes_) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

std::optional<std::size_t> DomainSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

DomainSchema default_schema() {
  std::vector<AttributeSpec> attrs;
  attrs.push_back({"name", AttributeKind::VerbatimString, {},
                   {"The Wrestlers", "Loch Fyne", "The Eagle", "Blue Spice", "The Mill",
                    "Giraffe", "Zizzi", "Cotto", "The Punter", "Fitzbillies", "Aromi",
                    "Clowns", "Strada", "The Vaults", "Bibimbap House", "The Golden Curry",
                    "Midsummer House", "The Rice Boat", "Alimentum", "Wildwood",
                    "Browns Cambridge", "The Cricketers", "The Olive Grove", "Green Man",
                    "The Phoenix", "The Waterman", "Cocum", "The Twenty Two",
                    "Taste of Cambridge", "The Dumpling Tree"}});
  attrs.push_back({"eatType", AttributeKind::ClosedSet, {"restaurant", "pub", "coffee shop"}, {}});
  attrs.push_back({"familyFriendly", AttributeKind::Boolean, {"Yes", "No"}, {}});
  attrs.push_back({"priceRange", AttributeKind::ClosedSet, {"cheap", "moderate", "expensive"}, {}});
  attrs.push_back({"food", AttributeKind::ClosedSet,
                   {"Japanese", "Italian", "Chinese", "French", "English", "Indian", "Fast food"},
                   {}});
  attrs.push_back({"near", AttributeKind::VerbatimString, {},
                   {"Cafe Adriatic", "market square", "Burger King", "The Bakers",
                    "Raja Indian Cuisine", "Express by Holiday Inn", "Crowne Plaza Hotel",
                    "Rainbow Vegetarian Cafe", "All Bar One", "Yippee Noodle Bar",
                    "The Portland Arms", "Avalon", "Ranch", "Cafe Sicilia", "The Sorrento",
                    "Clare Hall"}});
  attrs.push_back({"area", AttributeKind::ClosedSet, {"riverside", "city centre"}, {}});
  attrs.push_back({"customerRating", AttributeKind::Enumerable,
                   {"1 of 5 (low)", "2 of 5 (low)", "3 of 5 (average)", "4 of 5 (high)",
                    "5 of 5 (high)"},
                   {}});
  return DomainSchema(std::move(attrs));
}

DomainSchema schema_from_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("schema is not valid JSON: ") + e.what());
  }
  if (!doc.contains("attributes") || !doc["attributes"].is_array()) {
    throw SchemaError("schema needs an 'attributes' array");
  }
  std::vector<AttributeSpec> attrs;
  for (const auto& a : doc["attributes"]) {
    AttributeSpec spec;
    spec.name = a.value("name", "");
    const auto kind_text = a.value("kind", "");
    const auto kind = attribute_kind_from_string(kind_text);
    if (!kind) throw SchemaError("attribute '" + spec.name + "' has unknown kind '" + kind_text + "'");
    spec.kind = *kind;
    if (a.contains("values")) spec.legal_values = a["values"].get<std::vector<std::string>>();
    if (a.contains("samples")) spec.sample_values = a["samples"].get<std::vector<std::string>>();
    attrs.push_back(std::move(spec));
  }
  return DomainSchema(std::move(attrs));
}

DomainSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return schema_from_json(buf.str());
}

std::string schema_to_json(const DomainSchema& schema) {
  nlohmann::ordered_json doc;
  doc["attributes"] = nlohmann::ordered_json::array();
  for (const auto& spec : schema.attributes()) {
    nlohmann::ordered_json a;
    a["name"] = spec.name;
    a["kind"] = std::string(to_string(spec.kind));
    if (spec.kind != AttributeKind::VerbatimString) a["values"] = spec.legal_values;
    if (!spec.sample_values.empty()) a["samples"] = spec.sample_values;
    doc["attributes"].push_back(std::move(a));
  }
  return doc.dump(2) + "\n";
}

}  // namespace crowdnlg
