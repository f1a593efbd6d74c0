#include "crowdnlg/service.hpp"

#include <algorithm>
#include <iostream>

#include "crowdnlg/mr_generator.hpp"
#include "crowdnlg/rng.hpp"
#include "crowdnlg/text.hpp"

namespace crowdnlg {

Clock system_clock() {
  return [] { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); };
}

HeaderCountryResolver::HeaderCountryResolver(std::string header) : header_(text::fold_case(header)) {}

std::string HeaderCountryResolver::resolve(const RequestContext& ctx) const {
  const auto it = ctx.headers.find(header_);
  if (it == ctx.headers.end()) return {};
  std::string code = text::trim(it->second);
  std::transform(code.begin(), code.end(), code.begin(), [](unsigned char c) { return std::toupper(c); });
  return code;
}

std::string PrefixCountryResolver::resolve(const RequestContext& ctx) const {
  std::string best_code;
  std::size_t best_len = 0;
  for (const auto& [prefix, code] : prefixes_) {
    if (ctx.remote_addr.rfind(prefix, 0) == 0 && prefix.size() >= best_len) {
      best_len = prefix.size();
      best_code = code;
    }
  }
  return best_code;
}

std::unique_ptr<CountryResolver> make_country_resolver(const CountryResolverConfig& config) {
  if (config.kind == "static") return std::make_unique<StaticCountryResolver>(config.code);
  if (config.kind == "prefix") return std::make_unique<PrefixCountryResolver>(config.prefixes);
  return std::make_unique<HeaderCountryResolver>(config.header);
}

std::string_view to_string(ServiceError::Kind kind) {
  using K = ServiceError::Kind;
  switch (kind) {
    case K::UnknownBatch: return "UnknownBatch";
    case K::BatchClosed: return "BatchClosed";
    case K::NoSuchTask: return "NoSuchTask";
    case K::TaskAlreadyClosed: return "TaskAlreadyClosed";
    case K::DuplicateRating: return "DuplicateRating";
    case K::NoSuchUtterance: return "NoSuchUtterance";
    case K::UnknownMr: return "UnknownMr";
    case K::InvalidRequest: return "InvalidRequest";
  }
  return "InvalidRequest";
}

CollectionService::CollectionService(ServiceOptions options)
    : options_(std::move(options)), store_(options_.store) {
  if (!options_.clock) options_.clock = system_clock();
  if (!options_.resolver) options_.resolver = std::make_shared<HeaderCountryResolver>("X-Country-Code");
  if (options_.task_ttl_seconds < 1) throw std::invalid_argument("task_ttl_seconds must be >= 1");
  for (std::size_t i = 0; i < options_.mrs.size(); ++i) {
    if (!mr_index_.emplace(options_.mrs[i].id, i).second) {
      throw std::invalid_argument("duplicate MR id " + options_.mrs[i].id);
    }
  }
  for (auto& b : options_.batches) {
    if (b.max_pages_per_worker < 1) throw std::invalid_argument("max_pages_per_worker must be >= 1");
    if (b.mrs.empty()) {
      for (const auto& mr : options_.mrs) b.mrs.push_back(mr.id);
    }
    for (const auto& id : b.mrs) {
      if (!mr_index_.count(id)) throw std::invalid_argument("batch " + b.id + " references unknown MR " + id);
    }
  }

  const auto corpus = store_.snapshot();
  for (const auto& t : corpus.tasks) {
    tasks_[t.id] = t;
    auto& w = worker(t.worker_id);
    if (t.status == TaskStatus::Open) {
      w.open_tasks.insert(t.id);
      w.seen_mrs.insert(t.mr_id);
    }
    if (t.status != TaskStatus::Expired) ++mr_load_[t.mr_id];
  }
  for (const auto& u : corpus.utterances) {
    auto& w = worker(u.worker_id);
    w.accepted_texts.push_back(u.text);
    w.seen_mrs.insert(u.mr_id);
    ++w.accepted[u.batch_id];
    utterance_ids_.insert(u.id);
  }
  for (const auto& r : corpus.ratings) rated_.emplace(r.utterance_id, r.rater_id, r.kind);
}

const BatchConfig& CollectionService::batch(const std::string& batch_id) const {
  for (const auto& b : options_.batches) {
    if (b.id == batch_id) return b;
  }
  throw ServiceError(ServiceError::Kind::UnknownBatch, "unknown batch " + batch_id);
}

CollectionService::WorkerState& CollectionService::worker(const std::string& worker_id) {
  auto& slot = workers_[worker_id];
  if (!slot) slot = std::make_unique<WorkerState>();
  return *slot;
}

const MeaningRepresentation& CollectionService::mr(const std::string& mr_id) const {
  const auto it = mr_index_.find(mr_id);
  if (it == mr_index_.end()) throw ServiceError(ServiceError::Kind::UnknownMr, "unknown MR " + mr_id);
  return options_.mrs[it->second];
}

std::string CollectionService::mr_text(const std::string& mr_id) const {
  return serialize_textual_mr(mr(mr_id), options_.render_seed ^ fnv1a(mr_id));
}

std::string CollectionService::mr_svg(const std::string& mr_id) const {
  return render::render_svg(mr(mr_id), options_.schema, options_.render, options_.render_seed ^ fnv1a(mr_id));
}

// Caller holds the worker mutex and the state mutex.
void CollectionService::expire_stale(WorkerState& state, const std::string& worker_id, Timestamp now) {
  const auto ttl = std::chrono::seconds(options_.task_ttl_seconds);
  for (auto it = state.open_tasks.begin(); it != state.open_tasks.end();) {
    auto& task = tasks_.at(*it);
    if (task.worker_id == worker_id && now - task.issued_at >= ttl) {
      store_.close_task(task.id, TaskStatus::Expired);
      task.status = TaskStatus::Expired;
      state.seen_mrs.erase(task.mr_id);
      --mr_load_[task.mr_id];
      it = state.open_tasks.erase(it);
    } else {
      ++it;
    }
  }
}

NextTask CollectionService::next_task(const std::string& worker_id, const std::string& batch_id) {
  if (worker_id.empty()) throw ServiceError(ServiceError::Kind::InvalidRequest, "missing worker id");
  const auto& b = batch(batch_id);
  const auto now = options_.clock();
  if (!b.is_open(now)) throw ServiceError(ServiceError::Kind::BatchClosed, "batch " + batch_id + " is closed");

  WorkerState* state = nullptr;
  {
    std::lock_guard lock(state_mutex_);
    state = &worker(worker_id);
  }
  std::lock_guard worker_lock(state->mutex);
  std::lock_guard lock(state_mutex_);
  expire_stale(*state, worker_id, now);

  int in_batch = state->accepted[batch_id];
  for (const auto& id : state->open_tasks) {
    if (tasks_.at(id).batch_id == batch_id) ++in_batch;
  }
  if (in_batch >= b.max_pages_per_worker) {
    return {std::nullopt, "quota of " + std::to_string(b.max_pages_per_worker) + " pages reached"};
  }

  const std::string* pick = nullptr;
  std::size_t pick_load = 0;
  for (const auto& id : b.mrs) {
    if (state->seen_mrs.count(id)) continue;
    const auto load = mr_load_[id];
    if (!pick || load < pick_load) {
      pick = &id;
      pick_load = load;
    }
  }
  if (!pick) return {std::nullopt, "no unanswered MR left in batch"};

  TaskRecord task;
  task.mr_id = *pick;
  task.batch_id = batch_id;
  task.modality = b.modality;
  task.worker_id = worker_id;
  task.issued_at = now;
  task.id = store_.append(task);
  tasks_[task.id] = task;
  state->open_tasks.insert(task.id);
  state->seen_mrs.insert(task.mr_id);
  ++mr_load_[task.mr_id];
  return {task, {}};
}

SubmitResult CollectionService::submit(const std::string& task_id, const std::string& worker_id,
                                       const std::string& text, const RequestContext& ctx) {
  WorkerState* state = nullptr;
  {
    std::lock_guard lock(state_mutex_);
    const auto it = tasks_.find(task_id);
    if (it == tasks_.end() || it->second.worker_id != worker_id) {
      throw ServiceError(ServiceError::Kind::NoSuchTask, "no task " + task_id + " issued to " + worker_id);
    }
    state = &worker(worker_id);
  }
  std::lock_guard worker_lock(state->mutex);
  const auto now = options_.clock();
  TaskRecord task;
  {
    std::lock_guard lock(state_mutex_);
    expire_stale(*state, worker_id, now);
    task = tasks_.at(task_id);
  }
  if (task.status != TaskStatus::Open) {
    throw ServiceError(ServiceError::Kind::TaskAlreadyClosed,
                       "task " + task_id + " is " + std::string(to_string(task.status)));
  }

  const auto& m = mr(task.mr_id);
  Submission sub;
  sub.worker_id = worker_id;
  sub.mr_id = task.mr_id;
  sub.text = text;
  sub.issued_at = task.issued_at;
  sub.submitted_at = now;
  sub.modality = task.modality;
  sub.batch_id = task.batch_id;
  sub.country_code = options_.resolver->resolve(ctx);

  SubmitResult result;
  result.report = validate_submission(sub, m, options_.schema, state->accepted_texts, options_.validation);
  if (!result.report.accepted()) return result;

  UtteranceRecord u;
  u.task_id = task.id;
  u.worker_id = worker_id;
  u.mr_id = task.mr_id;
  u.mr_text = canonical_text(m, options_.schema);
  u.attr_count = static_cast<int>(m.complexity());
  u.text = text;
  u.modality = task.modality;
  u.batch_id = task.batch_id;
  u.issued_at = task.issued_at;
  u.submitted_at = now;
  u.country_code = sub.country_code;
  u.id = store_.append(u);
  store_.close_task(task.id, TaskStatus::Submitted);
  {
    std::lock_guard lock(state_mutex_);
    tasks_[task.id].status = TaskStatus::Submitted;
    state->open_tasks.erase(task.id);
    ++state->accepted[task.batch_id];
    utterance_ids_.insert(u.id);
  }
  state->accepted_texts.push_back(text);

  store_.append(ScoreRecord{u.id, "baseline", score_baseline(m, text, options_.schema, options_.lexicon)});
  if (options_.remote) {
    try {
      store_.append(ScoreRecord{u.id, "remote", options_.remote->score(u.mr_text, text)});
    } catch (const SimilarityError& e) {
      std::cerr << "warning: remote similarity for " << u.id << " failed: " << e.what() << '\n';
    }
  }
  result.accepted = true;
  result.utterance_id = u.id;
  return result;
}

std::string CollectionService::rate(RatingRecord rating) {
  try {
    check_rating(rating);
  } catch (const std::invalid_argument& e) {
    throw ServiceError(ServiceError::Kind::InvalidRequest, e.what());
  }
  if (rating.rater_id.empty()) throw ServiceError(ServiceError::Kind::InvalidRequest, "missing rater id");
  std::lock_guard lock(state_mutex_);
  if (!utterance_ids_.count(rating.utterance_id)) {
    throw ServiceError(ServiceError::Kind::NoSuchUtterance, "no utterance " + rating.utterance_id);
  }
  const auto key = std::make_tuple(rating.utterance_id, rating.rater_id, rating.kind);
  if (rated_.count(key)) {
    throw ServiceError(ServiceError::Kind::DuplicateRating,
                       rating.rater_id + " already rated " + rating.utterance_id + " as " +
                           std::string(to_string(rating.kind)));
  }
  auto id = store_.append(std::move(rating));
  rated_.insert(key);
  return id;
}

std::size_t CollectionService::score_remote() {
  if (!options_.remote) return 0;
  const auto corpus = store_.snapshot();
  std::set<std::string> done;
  for (const auto& s : corpus.scores) {
    if (s.scorer == "remote") done.insert(s.utterance_id);
  }
  std::size_t added = 0;
  for (const auto& u : corpus.utterances) {
    if (done.count(u.id)) continue;
    try {
      store_.append(ScoreRecord{u.id, "remote", options_.remote->score(u.mr_text, u.text)});
      ++added;
    } catch (const SimilarityError& e) {
      std::cerr << "warning: remote similarity for " << u.id << " failed: " << e.what() << '\n';
    }
  }
  return added;
}

analysis::AnalysisReport CollectionService::analyze(const analysis::AnalysisOptions& options) const {
  return analysis::analyze(store_.snapshot(), options);
}

ExportBundle CollectionService::export_bundle() const { return make_export_bundle(store_.snapshot()); }

ServiceOptions service_options_from_config(const AppConfig& config) {
  ServiceOptions o;
  if (config.schema) o.schema = load_schema(*config.schema);
  if (config.validation) o.validation = load_validation_config(*config.validation);
  if (config.lexicon) o.lexicon = load_lexicon(*config.lexicon);
  if (config.glyphs && std::filesystem::exists(*config.glyphs)) {
    const auto loaded = render::GlyphLibrary::load_directory(*config.glyphs);
    for (const auto& [id, fragment] : loaded.all()) o.render.glyphs.set(id, fragment);
  }
  render::check_coverage(o.render, o.schema);
  o.render_seed = config.render_seed;
  o.mrs = load_mr_set(config.mr_set, o.schema);
  o.batches = config.batches;
  o.store = config.store;
  o.task_ttl_seconds = config.task_ttl_seconds;
  o.resolver = make_country_resolver(config.country_resolver);
  const auto endpoint = RemoteSimilarityClient::resolve_endpoint(config.similarity_endpoint);
  if (!endpoint.empty()) {
    o.cache = config.similarity_cache ? std::make_shared<SimilarityCache>(*config.similarity_cache)
                                      : std::make_shared<SimilarityCache>();
    o.remote = std::make_shared<RemoteSimilarityClient>(endpoint, *o.cache);
  }
  return o;
}

}  // namespace crowdnlg
