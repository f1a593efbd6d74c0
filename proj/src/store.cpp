#include "crowdnlg/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crowdnlg/text.hpp"

namespace crowdnlg {

using ojson = nlohmann::ordered_json;

std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::Open: return "open";
    case TaskStatus::Submitted: return "submitted";
    case TaskStatus::Expired: return "expired";
  }
  return "open";
}

static TaskStatus task_status_from_string(std::string_view s) {
  if (s == "open") return TaskStatus::Open;
  if (s == "submitted") return TaskStatus::Submitted;
  if (s == "expired") return TaskStatus::Expired;
  throw std::invalid_argument("unknown task status '" + std::string(s) + "'");
}

std::string_view to_string(RaterKind k) { return k == RaterKind::Self ? "self" : "crowd"; }

static RaterKind rater_kind_from_string(std::string_view s) {
  if (s == "self") return RaterKind::Self;
  if (s == "crowd") return RaterKind::Crowd;
  throw std::invalid_argument("unknown rater kind '" + std::string(s) + "'");
}

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::Informativeness: return "informativeness";
    case Criterion::Naturalness: return "naturalness";
    case Criterion::Phrasing: return "phrasing";
  }
  return "informativeness";
}

void check_rating(const RatingRecord& rating) {
  if (rating.kind == RaterKind::Crowd) {
    for (int v : rating.likert) {
      if (v < 1 || v > 6) throw std::invalid_argument("crowd ratings must be in 1..6");
    }
  }
}

const UtteranceRecord* Corpus::find_utterance(const std::string& id) const {
  for (const auto& u : utterances) {
    if (u.id == id) return &u;
  }
  return nullptr;
}

namespace {

std::string make_id(char prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%06zu", prefix, n);
  return buf;
}

std::size_t id_number(const std::string& id) {
  if (id.size() < 2) return 0;
  try {
    return std::stoul(id.substr(1));
  } catch (const std::exception&) {
    return 0;
  }
}

void put_rating_values(ojson& j, RaterKind kind, const std::array<int, 3>& likert,
                       const std::array<Bucket, 3>& labels, const std::optional<bool>& grammatical) {
  for (auto c : kCriteria) {
    const auto i = static_cast<std::size_t>(c);
    if (kind == RaterKind::Crowd) {
      j[std::string(to_string(c))] = likert[i];
    } else {
      j[std::string(to_string(c))] = std::string(to_string(labels[i]));
    }
  }
  if (grammatical) j["grammatical"] = *grammatical;
}

void get_rating_values(const nlohmann::json& j, RaterKind kind, std::array<int, 3>& likert,
                       std::array<Bucket, 3>& labels, std::optional<bool>& grammatical) {
  for (auto c : kCriteria) {
    const auto i = static_cast<std::size_t>(c);
    const auto& v = j.at(std::string(to_string(c)));
    if (kind == RaterKind::Crowd) {
      likert[i] = v.get<int>();
    } else {
      const auto b = bucket_from_string(v.get<std::string>());
      if (!b) throw std::invalid_argument("unknown self-evaluation label");
      labels[i] = *b;
    }
  }
  if (j.contains("grammatical") && !j["grammatical"].is_null()) grammatical = j["grammatical"].get<bool>();
}

ojson to_json(const TaskRecord& t) {
  ojson j;
  j["type"] = "task";
  j["id"] = t.id;
  j["mr_id"] = t.mr_id;
  j["batch"] = t.batch_id;
  j["modality"] = std::string(to_string(t.modality));
  j["worker"] = t.worker_id;
  j["issued_at"] = t.issued_at.time_since_epoch().count();
  return j;
}

ojson to_json(const UtteranceRecord& u) {
  ojson j;
  j["type"] = "utterance";
  j["id"] = u.id;
  j["task_id"] = u.task_id;
  j["worker"] = u.worker_id;
  j["mr_id"] = u.mr_id;
  j["mr"] = u.mr_text;
  j["attr_count"] = u.attr_count;
  j["text"] = u.text;
  j["modality"] = std::string(to_string(u.modality));
  j["batch"] = u.batch_id;
  if (u.issued_at) j["issued_at"] = u.issued_at->time_since_epoch().count();
  if (u.submitted_at) j["submitted_at"] = u.submitted_at->time_since_epoch().count();
  j["country"] = u.country_code;
  return j;
}

ojson to_json(const RatingRecord& r) {
  ojson j;
  j["type"] = "rating";
  j["id"] = r.id;
  j["utterance_id"] = r.utterance_id;
  j["rater"] = r.rater_id;
  j["kind"] = std::string(to_string(r.kind));
  put_rating_values(j, r.kind, r.likert, r.labels, r.grammatical);
  return j;
}

ojson to_json(const ScoreRecord& s) {
  ojson j;
  j["type"] = "score";
  j["utterance_id"] = s.utterance_id;
  j["scorer"] = s.scorer;
  j["raw"] = s.raw;
  return j;
}

RaterKind kind_of(const nlohmann::json& j) { return rater_kind_from_string(j.at("kind").get<std::string>()); }

Timestamp ts(const nlohmann::json& j) { return Timestamp(std::chrono::seconds(j.get<std::int64_t>())); }

}  // namespace

RatingRecord rating_from_json(std::string_view json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    RatingRecord r;
    r.utterance_id = j.at("utterance_id").get<std::string>();
    r.rater_id = j.at("rater").get<std::string>();
    r.kind = kind_of(j);
    get_rating_values(j, r.kind, r.likert, r.labels, r.grammatical);
    check_rating(r);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(e.what());
  }
}

RecordStore::RecordStore(std::filesystem::path path, LoadOptions options) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  {
    std::ifstream in(path_);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      try {
        apply(line, line_no);
      } catch (const CorruptRecord&) {
        if (!options.skip_corrupt) throw;
        ++skipped_;
      }
    }
  }
  fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw std::runtime_error("cannot open store " + path_.string() + ": " + std::strerror(errno));
  }
}

RecordStore::~RecordStore() {
  if (fd_ >= 0) ::close(fd_);
}

void RecordStore::apply(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
    const auto type = j.at("type").get<std::string>();
    if (type == "task") {
      TaskRecord t;
      t.id = j.at("id").get<std::string>();
      t.mr_id = j.at("mr_id").get<std::string>();
      t.batch_id = j.at("batch").get<std::string>();
      t.modality = modality_from_string(j.at("modality").get<std::string>());
      t.worker_id = j.at("worker").get<std::string>();
      t.issued_at = ts(j.at("issued_at"));
      task_index_[t.id] = corpus_.tasks.size();
      next_task_ = std::max(next_task_, id_number(t.id) + 1);
      corpus_.tasks.push_back(std::move(t));
    } else if (type == "task_status") {
      const auto id = j.at("task_id").get<std::string>();
      const auto it = task_index_.find(id);
      if (it == task_index_.end()) throw std::invalid_argument("status for unknown task " + id);
      corpus_.tasks[it->second].status = task_status_from_string(j.at("status").get<std::string>());
    } else if (type == "utterance") {
      UtteranceRecord u;
      u.id = j.at("id").get<std::string>();
      u.task_id = j.value("task_id", "");
      u.worker_id = j.at("worker").get<std::string>();
      u.mr_id = j.value("mr_id", "");
      u.mr_text = j.at("mr").get<std::string>();
      u.attr_count = j.at("attr_count").get<int>();
      u.text = j.at("text").get<std::string>();
      u.modality = modality_from_string(j.at("modality").get<std::string>());
      u.batch_id = j.value("batch", "");
      if (j.contains("issued_at")) u.issued_at = ts(j["issued_at"]);
      if (j.contains("submitted_at")) u.submitted_at = ts(j["submitted_at"]);
      u.country_code = j.value("country", "");
      next_utterance_ = std::max(next_utterance_, id_number(u.id) + 1);
      corpus_.utterances.push_back(std::move(u));
    } else if (type == "rating") {
      RatingRecord r;
      r.id = j.at("id").get<std::string>();
      r.utterance_id = j.at("utterance_id").get<std::string>();
      r.rater_id = j.at("rater").get<std::string>();
      r.kind = rater_kind_from_string(j.at("kind").get<std::string>());
      get_rating_values(j, r.kind, r.likert, r.labels, r.grammatical);
      check_rating(r);
      next_rating_ = std::max(next_rating_, id_number(r.id) + 1);
      corpus_.ratings.push_back(std::move(r));
    } else if (type == "score") {
      ScoreRecord s;
      s.utterance_id = j.at("utterance_id").get<std::string>();
      s.scorer = j.at("scorer").get<std::string>();
      s.raw = j.at("raw").get<double>();
      corpus_.scores.push_back(std::move(s));
    } else {
      throw std::invalid_argument("unknown record type '" + type + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptRecord(line_no, e.what());
  } catch (const std::invalid_argument& e) {
    throw CorruptRecord(line_no, e.what());
  }
}

void RecordStore::write_line(const std::string& line) {
  const std::string buf = line + "\n";
  std::size_t written = 0;
  while (written < buf.size()) {
    const auto n = ::write(fd_, buf.data() + written, buf.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("write to " + path_.string() + " failed: " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
}

std::string RecordStore::append(TaskRecord task) {
  std::lock_guard lock(mutex_);
  task.id = make_id('t', next_task_++);
  task.status = TaskStatus::Open;
  write_line(to_json(task).dump());
  task_index_[task.id] = corpus_.tasks.size();
  corpus_.tasks.push_back(task);
  return task.id;
}

void RecordStore::close_task(const std::string& task_id, TaskStatus status) {
  std::lock_guard lock(mutex_);
  const auto it = task_index_.find(task_id);
  if (it == task_index_.end()) throw std::invalid_argument("unknown task " + task_id);
  ojson j;
  j["type"] = "task_status";
  j["task_id"] = task_id;
  j["status"] = std::string(to_string(status));
  write_line(j.dump());
  corpus_.tasks[it->second].status = status;
}

std::string RecordStore::append(UtteranceRecord utterance) {
  std::lock_guard lock(mutex_);
  utterance.id = make_id('u', next_utterance_++);
  write_line(to_json(utterance).dump());
  corpus_.utterances.push_back(utterance);
  return utterance.id;
}

std::string RecordStore::append(RatingRecord rating) {
  check_rating(rating);
  std::lock_guard lock(mutex_);
  rating.id = make_id('r', next_rating_++);
  write_line(to_json(rating).dump());
  corpus_.ratings.push_back(rating);
  return rating.id;
}

void RecordStore::append(const ScoreRecord& score) {
  std::lock_guard lock(mutex_);
  write_line(to_json(score).dump());
  corpus_.scores.push_back(score);
}

Corpus RecordStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return corpus_;
}

Corpus load_corpus(const std::filesystem::path& path, LoadOptions options) {
  if (!std::filesystem::exists(path)) throw std::runtime_error("no such corpus file " + path.string());
  RecordStore store(path, options);
  return store.snapshot();
}

FilterResult apply_between_subject_filter(const Corpus& corpus) {
  std::map<std::string, std::set<Modality>> modalities;
  for (const auto& u : corpus.utterances) modalities[u.worker_id].insert(u.modality);

  FilterResult result;
  result.corpus.tasks = corpus.tasks;
  std::set<std::string> dropped;
  std::map<std::string, std::size_t> excluded_per_worker;
  for (const auto& u : corpus.utterances) {
    const bool cross = modalities[u.worker_id].size() > 1;
    if (cross && u.modality == Modality::Pictorial) {
      dropped.insert(u.id);
      ++excluded_per_worker[u.worker_id];
      continue;
    }
    result.corpus.utterances.push_back(u);
  }
  for (const auto& r : corpus.ratings) {
    if (dropped.count(r.utterance_id) == 0) result.corpus.ratings.push_back(r);
  }
  for (const auto& s : corpus.scores) {
    if (dropped.count(s.utterance_id) == 0) result.corpus.scores.push_back(s);
  }
  for (const auto& [worker, count] : excluded_per_worker) result.exclusions.push_back({worker, count});
  return result;
}

std::size_t distinct_utterance_count(const Corpus& corpus) {
  std::set<std::string> seen;
  for (const auto& u : corpus.utterances) seen.insert(text::normalize_utterance(u.text));
  return seen.size();
}

ExportBundle make_export_bundle(const Corpus& corpus) {
  auto filtered = apply_between_subject_filter(corpus);
  ExportBundle bundle;
  bundle.exclusions = std::move(filtered.exclusions);
  auto utterances = filtered.corpus.utterances;
  std::stable_sort(utterances.begin(), utterances.end(),
                   [](const auto& a, const auto& b) { return a.id < b.id; });
  std::map<std::string, std::size_t> index;
  for (const auto& u : utterances) {
    index[u.id] = bundle.entries.size();
    ExportEntry e;
    e.mr = u.mr_text;
    e.ref = u.text;
    e.modality = u.modality;
    e.attr_count = u.attr_count;
    e.worker = u.worker_id;
    bundle.entries.push_back(std::move(e));
  }
  for (const auto& s : filtered.corpus.scores) {
    if (auto it = index.find(s.utterance_id); it != index.end()) {
      bundle.entries[it->second].scores[s.scorer] = s.raw;
    }
  }
  for (const auto& r : filtered.corpus.ratings) {
    if (auto it = index.find(r.utterance_id); it != index.end()) {
      bundle.entries[it->second].ratings.push_back({r.rater_id, r.kind, r.likert, r.labels, r.grammatical});
    }
  }
  return bundle;
}

std::string export_line(const ExportEntry& entry) {
  ojson j;
  j["mr"] = entry.mr;
  j["ref"] = entry.ref;
  j["modality"] = std::string(to_string(entry.modality));
  j["attr_count"] = entry.attr_count;
  j["worker"] = entry.worker;
  j["scores"] = ojson::object();
  for (const auto& [scorer, raw] : entry.scores) j["scores"][scorer] = raw;
  j["ratings"] = ojson::array();
  for (const auto& r : entry.ratings) {
    ojson rj;
    rj["rater"] = r.rater;
    rj["kind"] = std::string(to_string(r.kind));
    put_rating_values(rj, r.kind, r.likert, r.labels, r.grammatical);
    j["ratings"].push_back(std::move(rj));
  }
  return j.dump();
}

void write_export(const ExportBundle& bundle, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    for (const auto& e : bundle.entries) out << export_line(e) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

ExportBundle export_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  auto bundle = make_export_bundle(corpus);
  write_export(bundle, path);
  return bundle;
}

ExportBundle load_export(const std::filesystem::path& path, LoadOptions options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open export " + path.string());
  ExportBundle bundle;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ExportEntry e;
      e.mr = j.at("mr").get<std::string>();
      e.ref = j.at("ref").get<std::string>();
      e.modality = modality_from_string(j.at("modality").get<std::string>());
      e.attr_count = j.at("attr_count").get<int>();
      e.worker = j.at("worker").get<std::string>();
      for (const auto& [scorer, raw] : j.at("scores").items()) e.scores[scorer] = raw.get<double>();
      for (const auto& rj : j.at("ratings")) {
        ExportedRating r;
        r.rater = rj.at("rater").get<std::string>();
        r.kind = rater_kind_from_string(rj.at("kind").get<std::string>());
        get_rating_values(rj, r.kind, r.likert, r.labels, r.grammatical);
        e.ratings.push_back(std::move(r));
      }
      bundle.entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      if (!options.skip_corrupt) throw CorruptRecord(line_no, ex.what());
    }
  }
  return bundle;
}

Corpus corpus_from_bundle(const ExportBundle& bundle) {
  Corpus corpus;
  std::size_t rating_no = 1;
  for (std::size_t i = 0; i < bundle.entries.size(); ++i) {
    const auto& e = bundle.entries[i];
    UtteranceRecord u;
    u.id = make_id('u', i + 1);
    u.worker_id = e.worker;
    u.mr_text = e.mr;
    u.attr_count = e.attr_count;
    u.text = e.ref;
    u.modality = e.modality;
    corpus.utterances.push_back(u);
    for (const auto& [scorer, raw] : e.scores) corpus.scores.push_back({u.id, scorer, raw});
    for (const auto& r : e.ratings) {
      RatingRecord rec;
      rec.id = make_id('r', rating_no++);
      rec.utterance_id = u.id;
      rec.rater_id = r.rater;
      rec.kind = r.kind;
      rec.likert = r.likert;
      rec.labels = r.labels;
      rec.grammatical = r.grammatical;
      corpus.ratings.push_back(std::move(rec));
    }
  }
  return corpus;
}

namespace {

std::vector<std::string> parse_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

std::vector<RatingRecord> parse_ratings_csv(std::string_view text) {
  static const std::vector<std::string> kHeader = {"utterance_id", "rater_id",    "rater_kind", "informativeness",
                                                   "naturalness",  "phrasing", "grammatical"};
  std::vector<RatingRecord> out;
  std::size_t line_no = 0;
  bool header_seen = false;
  for (const auto& raw : text::split(text, '\n')) {
    ++line_no;
    if (text::trim(raw).empty()) continue;
    std::vector<std::string> f;
    try {
      f = parse_csv_line(raw);
    } catch (const std::invalid_argument& e) {
      throw CorruptRecord(line_no, e.what());
    }
    for (auto& s : f) s = text::trim(s);
    if (!header_seen) {
      if (f != kHeader) throw CorruptRecord(line_no, "ratings CSV header must be " + text::trim(
          "utterance_id,rater_id,rater_kind,informativeness,naturalness,phrasing,grammatical"));
      header_seen = true;
      continue;
    }
    if (f.size() != kHeader.size()) throw CorruptRecord(line_no, "expected 7 fields");
    try {
      RatingRecord r;
      r.utterance_id = f[0];
      r.rater_id = f[1];
      r.kind = rater_kind_from_string(f[2]);
      for (std::size_t i = 0; i < 3; ++i) {
        if (r.kind == RaterKind::Crowd) {
          std::size_t used = 0;
          r.likert[i] = std::stoi(f[3 + i], &used);
          if (used != f[3 + i].size()) throw std::invalid_argument("not an integer");
        } else {
          const auto b = bucket_from_string(f[3 + i]);
          if (!b) throw std::invalid_argument("unknown label '" + f[3 + i] + "'");
          r.labels[i] = *b;
        }
      }
      const auto g = text::fold_case(f[6]);
      if (g == "true" || g == "yes" || g == "1") {
        r.grammatical = true;
      } else if (g == "false" || g == "no" || g == "0") {
        r.grammatical = false;
      } else if (!g.empty()) {
        throw std::invalid_argument("grammatical must be true/false");
      }
      check_rating(r);
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw CorruptRecord(line_no, e.what());
    }
  }
  if (!header_seen) throw CorruptRecord(1, "missing header row");
  return out;
}

std::vector<RatingRecord> import_ratings_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_ratings_csv(buf.str());
}

}  // namespace crowdnlg
