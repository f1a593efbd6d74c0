#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crowdnlg/mr.hpp"
#include "crowdnlg/schema.hpp"

namespace crowdnlg {

enum class Bucket { LowerThanAverage, Average, HigherThanAverage };

std::string_view to_string(Bucket b);
std::optional<Bucket> bucket_from_string(std::string_view s);

struct SimilarityScore {
  double raw = 0;
  double normalized = 1;
  Bucket bucket = Bucket::LowerThanAverage;
};

class SimilarityError : public std::runtime_error {
 public:
  enum class Kind { Unreachable, MalformedResponse, OutOfRange };
  SimilarityError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// 1 + 5 * raw. Throws SimilarityError(OutOfRange) outside [0, 1].
double normalize_score(double raw);
/// > 4 higher, < 3 lower, average otherwise.
Bucket bucket_score(double normalized);
SimilarityScore make_score(double raw);

/// Synonym groups plus per-(attribute, value) phrasings.
class SynonymLexicon {
 public:
  /// Adds a group of mutually substitutable terms. Terms are stored in
  /// normalize_words() form; membership is symmetric.
  void add_group(const std::vector<std::string>& terms);
  void add_phrasing(const std::string& attribute, const std::string& value, const std::string& phrase);

  /// Every phrasing that counts as mentioning `value` of `attribute`,
  /// closed under the synonym groups.
  std::set<std::string> phrasings(const AttributeSpec& spec, const std::string& value) const;

  const std::vector<std::set<std::string>>& groups() const { return groups_; }
  const std::map<std::pair<std::string, std::string>, std::set<std::string>>& value_phrasings() const {
    return phrasings_;
  }

 private:
  std::vector<std::set<std::string>> groups_;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> phrasings_;
};

/// Phrasings for every non-verbatim value of the default schema.
SynonymLexicon default_lexicon();
SynonymLexicon lexicon_from_json(std::string_view json_text);
SynonymLexicon load_lexicon(const std::filesystem::path& path);
std::string lexicon_to_json(const SynonymLexicon& lexicon);

/// Fraction of MR pairs whose value (or an equivalent phrasing) occurs in
/// the utterance. Verbatim values must occur themselves.
double score_baseline(const MeaningRepresentation& mr, std::string_view utterance,
                      const DomainSchema& schema, const SynonymLexicon& lexicon);

/// Append-only (mr_text, utterance, raw) records. Thread-safe; the first
/// value written for a key wins.
class SimilarityCache {
 public:
  SimilarityCache() = default;
  /// Loads existing records; later writes are appended to the same file.
  explicit SimilarityCache(std::filesystem::path path);

  std::optional<double> get(const std::string& mr_text, const std::string& utterance) const;
  /// Returns the stored value (which is the earlier one if the key exists).
  double put(const std::string& mr_text, const std::string& utterance, double raw);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::filesystem::path path_;
  std::map<std::pair<std::string, std::string>, double> entries_;
};

/// Client for a remote semantic-similarity service. Requests are
/// GET <endpoint>?operation=api&phrase1=<mr>&phrase2=<utterance> and the
/// body is a bare decimal number.
class RemoteSimilarityClient {
 public:
  RemoteSimilarityClient(std::string endpoint, SimilarityCache& cache, int timeout_seconds = 10);

  /// Cache first, then network. Throws SimilarityError.
  double score(const std::string& mr_text, const std::string& utterance);

  /// Config value if non-empty, otherwise $CROWDNLG_SIMILARITY_ENDPOINT.
  static std::string resolve_endpoint(const std::string& config_value);

 private:
  std::string endpoint_;
  SimilarityCache& cache_;
  int timeout_seconds_;
};

/// Strict parse of a response body. Throws SimilarityError.
double parse_similarity_response(std::string_view body);

}  // namespace crowdnlg
