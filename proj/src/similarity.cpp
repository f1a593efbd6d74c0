#include "crowdnlg/similarity.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "crowdnlg/text.hpp"

namespace crowdnlg {

std::string_view to_string(Bucket b) {
  switch (b) {
    case Bucket::LowerThanAverage: return "lower_than_average";
    case Bucket::Average: return "average";
    case Bucket::HigherThanAverage: return "higher_than_average";
  }
  return "average";
}

std::optional<Bucket> bucket_from_string(std::string_view s) {
  if (s == "lower_than_average") return Bucket::LowerThanAverage;
  if (s == "average") return Bucket::Average;
  if (s == "higher_than_average") return Bucket::HigherThanAverage;
  return std::nullopt;
}

double normalize_score(double raw) {
  if (!(raw >= 0.0 && raw <= 1.0)) {
    throw SimilarityError(SimilarityError::Kind::OutOfRange,
                          "raw similarity " + std::to_string(raw) + " outside [0, 1]");
  }
  return 1.0 + 5.0 * raw;
}

Bucket bucket_score(double normalized) {
  if (normalized > 4.0) return Bucket::HigherThanAverage;
  if (normalized < 3.0) return Bucket::LowerThanAverage;
  return Bucket::Average;
}

SimilarityScore make_score(double raw) {
  SimilarityScore s;
  s.raw = raw;
  s.normalized = normalize_score(raw);
  s.bucket = bucket_score(s.normalized);
  return s;
}

void SynonymLexicon::add_group(const std::vector<std::string>& terms) {
  std::set<std::string> group;
  for (const auto& t : terms) {
    auto n = text::normalize_words(t);
    if (!n.empty()) group.insert(std::move(n));
  }
  if (group.empty()) throw std::invalid_argument("synonym group must not be empty");
  groups_.push_back(std::move(group));
}

void SynonymLexicon::add_phrasing(const std::string& attribute, const std::string& value,
                                  const std::string& phrase) {
  auto n = text::normalize_words(phrase);
  if (n.empty()) throw std::invalid_argument("empty phrasing for " + attribute + "[" + value + "]");
  phrasings_[{attribute, value}].insert(std::move(n));
}

std::set<std::string> SynonymLexicon::phrasings(const AttributeSpec& spec, const std::string& value) const {
  std::set<std::string> out;
  if (spec.kind == AttributeKind::Boolean) {
    // A bare "yes"/"no" says nothing; the attribute-qualified form does.
    out.insert(text::normalize_words(spec.name + " " + value));
  } else {
    out.insert(text::normalize_words(value));
  }
  if (const auto it = phrasings_.find({spec.name, value}); it != phrasings_.end()) {
    out.insert(it->second.begin(), it->second.end());
  }
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& group : groups_) {
      const bool hit = std::any_of(group.begin(), group.end(), [&](const auto& t) { return out.count(t) != 0; });
      if (!hit) continue;
      for (const auto& t : group) grew |= out.insert(t).second;
    }
  }
  return out;
}

SynonymLexicon default_lexicon() {
  SynonymLexicon lex;
  lex.add_group({"cheap", "low cost", "low price", "low priced", "inexpensive", "affordable", "budget"});
  lex.add_group({"moderate", "moderately priced", "mid priced", "average price", "reasonably priced"});
  lex.add_group({"expensive", "high priced", "high price", "pricey", "costly", "upmarket"});
  lex.add_group({"restaurant", "eatery", "dining"});
  lex.add_group({"pub", "bar", "inn", "tavern"});
  lex.add_group({"coffee shop", "cafe", "coffee house"});
  lex.add_group({"riverside", "by the river", "river", "waterfront", "riverbank"});
  lex.add_group({"city centre", "city center", "town centre", "centre of town", "center of town", "downtown"});
  lex.add_group({"japanese", "sushi"});
  lex.add_group({"italian", "pasta", "pizza"});
  lex.add_group({"chinese", "dim sum", "noodles"});
  lex.add_group({"indian", "curry"});
  lex.add_group({"english", "british"});
  lex.add_group({"french", "bistro"});
  lex.add_group({"fast food", "burgers", "burger"});

  for (const char* p : {"family friendly", "child friendly", "kid friendly", "kids", "children", "families"}) {
    lex.add_phrasing("familyFriendly", "Yes", p);
  }
  for (const char* p : {"not family friendly", "not child friendly", "not kid friendly", "adults only",
                        "no kids", "no children"}) {
    lex.add_phrasing("familyFriendly", "No", p);
  }
  const std::vector<std::pair<std::string, std::vector<std::string>>> ratings = {
      {"1 of 5 (low)", {"1 of 5", "one star", "1 star", "low rating", "low customer rating", "poorly rated", "low rated"}},
      {"2 of 5 (low)", {"2 of 5", "two stars", "2 stars", "low rating", "low customer rating", "poorly rated", "low rated"}},
      {"3 of 5 (average)", {"3 of 5", "three stars", "3 stars", "average rating", "average customer rating", "averagely rated"}},
      {"4 of 5 (high)", {"4 of 5", "four stars", "4 stars", "high rating", "high customer rating", "highly rated", "well rated"}},
      {"5 of 5 (high)", {"5 of 5", "five stars", "5 stars", "high rating", "high customer rating", "highly rated", "top rated"}},
  };
  for (const auto& [value, phrases] : ratings) {
    for (const auto& p : phrases) lex.add_phrasing("customerRating", value, p);
  }
  return lex;
}

SynonymLexicon lexicon_from_json(std::string_view json_text) {
  const auto doc = nlohmann::json::parse(json_text);
  SynonymLexicon lex;
  for (const auto& g : doc.value("groups", nlohmann::json::array())) {
    lex.add_group(g.get<std::vector<std::string>>());
  }
  for (const auto& p : doc.value("phrasings", nlohmann::json::array())) {
    const auto attr = p.at("attribute").get<std::string>();
    const auto value = p.at("value").get<std::string>();
    for (const auto& phrase : p.at("phrases")) lex.add_phrasing(attr, value, phrase.get<std::string>());
  }
  return lex;
}

SynonymLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return lexicon_from_json(buf.str());
}

std::string lexicon_to_json(const SynonymLexicon& lexicon) {
  nlohmann::ordered_json doc;
  doc["groups"] = nlohmann::ordered_json::array();
  for (const auto& g : lexicon.groups()) {
    doc["groups"].push_back(std::vector<std::string>(g.begin(), g.end()));
  }
  doc["phrasings"] = nlohmann::ordered_json::array();
  for (const auto& [key, phrases] : lexicon.value_phrasings()) {
    nlohmann::ordered_json entry;
    entry["attribute"] = key.first;
    entry["value"] = key.second;
    entry["phrases"] = std::vector<std::string>(phrases.begin(), phrases.end());
    doc["phrasings"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

double score_baseline(const MeaningRepresentation& mr, std::string_view utterance,
                      const DomainSchema& schema, const SynonymLexicon& lexicon) {
  if (mr.pairs.empty()) return 0.0;
  const auto words = text::normalize_words(utterance);
  const auto folded = text::normalize_utterance(utterance);
  std::size_t covered = 0;
  for (const auto& [attr, value] : mr.pairs) {
    const auto* spec = schema.find(attr);
    if (spec == nullptr) continue;
    if (spec->kind == AttributeKind::VerbatimString) {
      if (folded.find(text::normalize_utterance(value)) != std::string::npos) ++covered;
      continue;
    }
    for (const auto& phrase : lexicon.phrasings(*spec, value)) {
      if (text::contains_words(words, phrase)) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(mr.pairs.size());
}

SimilarityCache::SimilarityCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      entries_.emplace(std::make_pair(rec.at("mr").get<std::string>(), rec.at("utterance").get<std::string>()),
                       rec.at("raw").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("corrupt similarity cache record at " + path_.string() + ":" +
                               std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::optional<double> SimilarityCache::get(const std::string& mr_text, const std::string& utterance) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find({mr_text, utterance});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double SimilarityCache::put(const std::string& mr_text, const std::string& utterance, double raw) {
  std::lock_guard lock(mutex_);
  const auto [it, inserted] = entries_.emplace(std::make_pair(mr_text, utterance), raw);
  if (inserted && !path_.empty()) {
    nlohmann::ordered_json rec;
    rec["mr"] = mr_text;
    rec["utterance"] = utterance;
    rec["raw"] = raw;
    std::ofstream out(path_, std::ios::app);
    out << rec.dump() << '\n';
    out.flush();
  }
  return it->second;
}

std::size_t SimilarityCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

double parse_similarity_response(std::string_view body) {
  const auto trimmed = text::trim(body);
  if (trimmed.empty()) {
    throw SimilarityError(SimilarityError::Kind::MalformedResponse, "empty similarity response");
  }
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(trimmed.c_str(), &end);
  if (end != trimmed.c_str() + trimmed.size() || errno != 0 || std::isnan(value)) {
    throw SimilarityError(SimilarityError::Kind::MalformedResponse,
                          "similarity response is not a number: '" + trimmed + "'");
  }
  if (value < 0.0 || value > 1.0) {
    throw SimilarityError(SimilarityError::Kind::OutOfRange,
                          "similarity response " + trimmed + " outside [0, 1]");
  }
  return value;
}

RemoteSimilarityClient::RemoteSimilarityClient(std::string endpoint, SimilarityCache& cache,
                                               int timeout_seconds)
    : endpoint_(std::move(endpoint)), cache_(cache), timeout_seconds_(timeout_seconds) {}

std::string RemoteSimilarityClient::resolve_endpoint(const std::string& config_value) {
  if (!config_value.empty()) return config_value;
  if (const char* env = std::getenv("CROWDNLG_SIMILARITY_ENDPOINT")) return env;
  return {};
}

double RemoteSimilarityClient::score(const std::string& mr_text, const std::string& utterance) {
  if (auto cached = cache_.get(mr_text, utterance)) return *cached;
  if (endpoint_.empty()) {
    throw SimilarityError(SimilarityError::Kind::Unreachable,
                          "no similarity endpoint configured and no cached score");
  }
  const auto scheme_end = endpoint_.find("://");
  const auto path_start = endpoint_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string host = endpoint_.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : endpoint_.substr(path_start);

  httplib::Client client(host);
  client.set_connection_timeout(timeout_seconds_, 0);
  client.set_read_timeout(timeout_seconds_, 0);
  const httplib::Params params{{"operation", "api"}, {"phrase1", mr_text}, {"phrase2", utterance}};
  const auto res = client.Get(path, params, httplib::Headers{});
  if (!res) {
    throw SimilarityError(SimilarityError::Kind::Unreachable,
                          "similarity service at " + endpoint_ + " unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw SimilarityError(SimilarityError::Kind::MalformedResponse,
                          "similarity service returned HTTP " + std::to_string(res->status));
  }
  const double raw = parse_similarity_response(res->body);
  return cache_.put(mr_text, utterance, raw);
}

}  // namespace crowdnlg
