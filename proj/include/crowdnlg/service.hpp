#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "crowdnlg/analysis.hpp"
#include "crowdnlg/config.hpp"
#include "crowdnlg/render.hpp"
#include "crowdnlg/similarity.hpp"
#include "crowdnlg/store.hpp"
#include "crowdnlg/validation.hpp"

namespace crowdnlg {

using Clock = std::function<Timestamp()>;
Clock system_clock();

/// What the service knows about the caller.
struct RequestContext {
  std::string remote_addr;
  std::map<std::string, std::string> headers;  // keys lower-cased
};

class CountryResolver {
 public:
  virtual ~CountryResolver() = default;
  /// ISO 3166-1 alpha-2 code, or empty when unknown.
  virtual std::string resolve(const RequestContext& ctx) const = 0;
};

class StaticCountryResolver : public CountryResolver {
 public:
  explicit StaticCountryResolver(std::string code) : code_(std::move(code)) {}
  std::string resolve(const RequestContext&) const override { return code_; }

 private:
  std::string code_;
};

/// Trusts a header set by a fronting proxy.
class HeaderCountryResolver : public CountryResolver {
 public:
  explicit HeaderCountryResolver(std::string header);
  std::string resolve(const RequestContext& ctx) const override;

 private:
  std::string header_;
};

/// Longest matching address prefix.
class PrefixCountryResolver : public CountryResolver {
 public:
  explicit PrefixCountryResolver(std::map<std::string, std::string> prefixes) : prefixes_(std::move(prefixes)) {}
  std::string resolve(const RequestContext& ctx) const override;

 private:
  std::map<std::string, std::string> prefixes_;
};

std::unique_ptr<CountryResolver> make_country_resolver(const CountryResolverConfig& config);

class ServiceError : public std::runtime_error {
 public:
  enum class Kind {
    UnknownBatch,
    BatchClosed,
    NoSuchTask,
    TaskAlreadyClosed,
    DuplicateRating,
    NoSuchUtterance,
    UnknownMr,
    InvalidRequest,
  };
  ServiceError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};
std::string_view to_string(ServiceError::Kind kind);

struct ServiceOptions {
  DomainSchema schema = default_schema();
  ValidationConfig validation;
  SynonymLexicon lexicon = default_lexicon();
  render::RenderConfig render = render::default_render_config();
  std::uint64_t render_seed = 1;
  std::vector<MeaningRepresentation> mrs;
  std::vector<BatchConfig> batches;
  std::filesystem::path store;
  int task_ttl_seconds = 3600;
  Clock clock;                                  // defaults to the system clock
  std::shared_ptr<CountryResolver> resolver;    // defaults to the X-Country-Code header
  std::shared_ptr<SimilarityCache> cache;           // backs `remote`
  std::shared_ptr<RemoteSimilarityClient> remote;  // optional
};

struct NextTask {
  std::optional<TaskRecord> task;  // absent when exhausted
  std::string reason;              // why it is exhausted
};

struct SubmitResult {
  bool accepted = false;
  std::string utterance_id;
  ValidationReport report;
};

/// Task issuance, submission intake and rating intake over a RecordStore.
/// State transitions of one worker are serialized; different workers
/// proceed concurrently.
class CollectionService {
 public:
  explicit CollectionService(ServiceOptions options);

  /// Throws ServiceError(UnknownBatch | BatchClosed).
  NextTask next_task(const std::string& worker_id, const std::string& batch_id);
  /// Throws ServiceError(NoSuchTask | TaskAlreadyClosed).
  SubmitResult submit(const std::string& task_id, const std::string& worker_id, const std::string& text,
                      const RequestContext& ctx = {});
  /// Throws ServiceError(NoSuchUtterance | DuplicateRating | InvalidRequest).
  std::string rate(RatingRecord rating);

  /// Scores every utterance lacking a remote score; failures are logged and
  /// skipped. Returns the number of new scores.
  std::size_t score_remote();

  const MeaningRepresentation& mr(const std::string& mr_id) const;  // throws UnknownMr
  std::string mr_text(const std::string& mr_id) const;              // shuffled presentation order
  std::string mr_svg(const std::string& mr_id) const;

  Corpus snapshot() const { return store_.snapshot(); }
  analysis::AnalysisReport analyze(const analysis::AnalysisOptions& options = {}) const;
  ExportBundle export_bundle() const;

  const std::vector<BatchConfig>& batches() const { return options_.batches; }

 private:
  struct WorkerState {
    std::mutex mutex;
    std::vector<std::string> accepted_texts;
    std::set<std::string> seen_mrs;           // accepted or open
    std::set<std::string> open_tasks;
    std::map<std::string, int> accepted;      // batch -> accepted count
  };

  const BatchConfig& batch(const std::string& batch_id) const;
  WorkerState& worker(const std::string& worker_id);
  void expire_stale(WorkerState& state, const std::string& worker_id, Timestamp now);

  ServiceOptions options_;
  RecordStore store_;
  std::map<std::string, std::size_t> mr_index_;

  mutable std::mutex state_mutex_;
  std::map<std::string, std::unique_ptr<WorkerState>> workers_;
  std::map<std::string, TaskRecord> tasks_;
  std::map<std::string, std::size_t> mr_load_;  // issued-and-not-expired count per MR
  std::set<std::tuple<std::string, std::string, RaterKind>> rated_;
  std::set<std::string> utterance_ids_;
};

/// Builds service options from an application config (files + env).
ServiceOptions service_options_from_config(const AppConfig& config);

}  // namespace crowdnlg
