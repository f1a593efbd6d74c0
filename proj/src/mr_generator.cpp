#include "crowdnlg/mr_generator.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crowdnlg/rng.hpp"

namespace crowdnlg {

namespace {

constexpr int kMaxValueRedraws = 200;

const std::vector<std::string>& value_pool(const AttributeSpec& spec) {
  return spec.kind == AttributeKind::VerbatimString ? spec.sample_values : spec.legal_values;
}

std::string format_id(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "mr-%03zu", n);
  return buf;
}

}  // namespace

std::vector<MeaningRepresentation> generate_balanced_set(const MrSetRequest& request) {
  const auto& schema = request.schema;
  const auto* name_spec = schema.find("name");
  for (const auto& [complexity, count] : request.counts) {
    if (complexity != 3 && complexity != 5 && complexity != 8) {
      throw InfeasibleRequest("complexity " + std::to_string(complexity) + " is not one of 3, 5, 8");
    }
    if (count < 0) throw InfeasibleRequest("negative count for complexity " + std::to_string(complexity));
    if (count > 0 && static_cast<std::size_t>(complexity) > schema.size()) {
      throw InfeasibleRequest("schema has only " + std::to_string(schema.size()) + " attributes");
    }
    if (count > 0 && complexity != 8 && name_spec == nullptr) {
      throw InfeasibleRequest("3/5-attribute MRs need a 'name' attribute in the schema");
    }
  }
  for (const auto& spec : schema.attributes()) {
    if (value_pool(spec).empty()) {
      throw InfeasibleRequest("attribute '" + spec.name + "' has no values to draw from");
    }
  }

  std::vector<const AttributeSpec*> others;
  for (const auto& spec : schema.attributes()) {
    if (spec.name != "name") others.push_back(&spec);
  }

  Rng rng(request.seed);
  std::map<std::string, int> usage;
  for (const auto* spec : others) usage[spec->name] = 0;

  std::set<std::vector<AttributeValue>> seen;
  std::vector<MeaningRepresentation> out;

  for (const auto& [complexity, count] : request.counts) {
    for (int i = 0; i < count; ++i) {
      std::vector<const AttributeSpec*> chosen;
      if (static_cast<std::size_t>(complexity) == schema.size()) {
        for (const auto& spec : schema.attributes()) chosen.push_back(&spec);
      } else {
        auto order = others;
        rng.shuffle(std::span<const AttributeSpec*>(order));
        std::stable_sort(order.begin(), order.end(), [&](const auto* a, const auto* b) {
          return usage[a->name] < usage[b->name];
        });
        if (name_spec != nullptr) chosen.push_back(name_spec);
        for (const auto* spec : order) {
          if (chosen.size() == static_cast<std::size_t>(complexity)) break;
          chosen.push_back(spec);
        }
        if (complexity != 8) {
          for (const auto* spec : chosen) {
            if (spec->name != "name") ++usage[spec->name];
          }
        }
      }

      MeaningRepresentation mr;
      bool placed = false;
      for (int attempt = 0; attempt < kMaxValueRedraws && !placed; ++attempt) {
        mr.pairs.clear();
        for (const auto* spec : chosen) {
          const auto& pool = value_pool(*spec);
          std::string value = pool[rng.below(pool.size())];
          mr.pairs.emplace_back(spec->name, std::move(value));
        }
        // A venue is never near itself.
        const auto* name = mr.value_of("name");
        const auto* near = mr.value_of("near");
        if (name != nullptr && near != nullptr && *name == *near) continue;
        placed = seen.insert(mr.sorted_pairs()).second;
      }
      if (!placed) {
        throw InfeasibleRequest("could not draw a distinct " + std::to_string(complexity) +
                                "-attribute MR; value pools too small for the requested count");
      }
      std::sort(mr.pairs.begin(), mr.pairs.end(), [&](const auto& a, const auto& b) {
        return *schema.index_of(a.first) < *schema.index_of(b.first);
      });
      mr.id = format_id(out.size() + 1);
      out.push_back(std::move(mr));
    }
  }
  return out;
}

std::map<std::string, int> attribute_usage(const std::vector<MeaningRepresentation>& mrs) {
  std::map<std::string, int> usage;
  for (const auto& mr : mrs) {
    if (mr.complexity() != 3 && mr.complexity() != 5) continue;
    for (const auto& [attr, value] : mr.pairs) {
      if (attr != "name") ++usage[attr];
    }
  }
  return usage;
}

}  // namespace crowdnlg

namespace crowdnlg {

std::string mr_set_to_json(const std::vector<MeaningRepresentation>& mrs, const DomainSchema& schema) {
  nlohmann::ordered_json j;
  j["mrs"] = nlohmann::ordered_json::array();
  for (const auto& mr : mrs) {
    j["mrs"].push_back({{"id", mr.id}, {"mr", canonical_text(mr, schema)}});
  }
  return j.dump(2) + "\n";
}

std::vector<MeaningRepresentation> mr_set_from_json(std::string_view json_text, const DomainSchema& schema) {
  const auto j = nlohmann::json::parse(json_text);
  std::vector<MeaningRepresentation> out;
  std::set<std::string> ids;
  for (const auto& entry : j.at("mrs")) {
    auto mr = parse_textual_mr(entry.at("mr").get<std::string>(), schema);
    mr.id = entry.at("id").get<std::string>();
    if (!ids.insert(mr.id).second) throw std::invalid_argument("duplicate MR id " + mr.id);
    out.push_back(std::move(mr));
  }
  return out;
}

std::vector<MeaningRepresentation> load_mr_set(const std::filesystem::path& path, const DomainSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open MR set " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return mr_set_from_json(buf.str(), schema);
}

}  // namespace crowdnlg
