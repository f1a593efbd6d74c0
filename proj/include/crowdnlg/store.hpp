#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "crowdnlg/similarity.hpp"
#include "crowdnlg/validation.hpp"

namespace crowdnlg {

enum class TaskStatus { Open, Submitted, Expired };
std::string_view to_string(TaskStatus s);

struct TaskRecord {
  std::string id;
  std::string mr_id;
  std::string batch_id;
  Modality modality = Modality::Textual;
  std::string worker_id;
  Timestamp issued_at{};
  TaskStatus status = TaskStatus::Open;
};

/// An accepted submission.
struct UtteranceRecord {
  std::string id;
  std::string task_id;
  std::string worker_id;
  std::string mr_id;
  std::string mr_text;  // canonical textual MR
  int attr_count = 0;
  std::string text;
  Modality modality = Modality::Textual;
  std::string batch_id;
  std::optional<Timestamp> issued_at;
  std::optional<Timestamp> submitted_at;
  std::string country_code;
};

enum class RaterKind { Self, Crowd };
std::string_view to_string(RaterKind k);

enum class Criterion { Informativeness = 0, Naturalness = 1, Phrasing = 2 };
inline constexpr std::array<Criterion, 3> kCriteria{Criterion::Informativeness, Criterion::Naturalness,
                                                    Criterion::Phrasing};
std::string_view to_string(Criterion c);

/// Crowd ratings use 1..6 Likert values; self ratings use the 3-level labels.
struct RatingRecord {
  std::string id;
  std::string utterance_id;
  std::string rater_id;
  RaterKind kind = RaterKind::Crowd;
  std::array<int, 3> likert{};
  std::array<Bucket, 3> labels{};
  std::optional<bool> grammatical;

  int likert_for(Criterion c) const { return likert[static_cast<std::size_t>(c)]; }
  Bucket label_for(Criterion c) const { return labels[static_cast<std::size_t>(c)]; }
};

/// Throws std::invalid_argument when values are outside the rater kind's scale.
void check_rating(const RatingRecord& rating);

/// {"utterance_id","rater","kind","informativeness","naturalness","phrasing","grammatical"}
/// with integers for crowd ratings and label strings for self ratings.
/// Throws std::invalid_argument.
RatingRecord rating_from_json(std::string_view json_text);

struct ScoreRecord {
  std::string utterance_id;
  std::string scorer;  // "baseline" or "remote"
  double raw = 0;
};

struct Corpus {
  std::vector<TaskRecord> tasks;
  std::vector<UtteranceRecord> utterances;
  std::vector<RatingRecord> ratings;
  std::vector<ScoreRecord> scores;

  const UtteranceRecord* find_utterance(const std::string& id) const;
};

class CorruptRecord : public std::runtime_error {
 public:
  CorruptRecord(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct LoadOptions {
  bool skip_corrupt = false;
};

/// Append-only journal, one JSON record per line. Each append is a single
/// write(2) of a complete line on an O_APPEND descriptor.
class RecordStore {
 public:
  /// Opens (creating if needed) and replays the journal.
  explicit RecordStore(std::filesystem::path path, LoadOptions options = {});
  ~RecordStore();
  RecordStore(const RecordStore&) = delete;
  RecordStore& operator=(const RecordStore&) = delete;

  std::string append(TaskRecord task);
  void close_task(const std::string& task_id, TaskStatus status);
  std::string append(UtteranceRecord utterance);
  std::string append(RatingRecord rating);
  void append(const ScoreRecord& score);

  /// Consistent copy of everything appended so far.
  Corpus snapshot() const;
  const std::filesystem::path& path() const { return path_; }
  std::size_t skipped_lines() const { return skipped_; }

 private:
  void write_line(const std::string& line);
  void apply(const std::string& line, std::size_t line_no);

  std::filesystem::path path_;
  int fd_ = -1;
  mutable std::mutex mutex_;
  Corpus corpus_;
  std::map<std::string, std::size_t> task_index_;
  std::size_t next_task_ = 1;
  std::size_t next_utterance_ = 1;
  std::size_t next_rating_ = 1;
  std::size_t skipped_ = 0;
};

/// Replays a journal without keeping it open.
Corpus load_corpus(const std::filesystem::path& path, LoadOptions options = {});

struct ExclusionEntry {
  std::string worker_id;
  std::size_t excluded = 0;
};

struct FilterResult {
  Corpus corpus;
  std::vector<ExclusionEntry> exclusions;
};

/// Drops the pictorial utterances (and their ratings and scores) of every
/// worker with accepted utterances in both modalities.
FilterResult apply_between_subject_filter(const Corpus& corpus);

/// Distinct utterances after trim/whitespace-collapse/case-fold.
std::size_t distinct_utterance_count(const Corpus& corpus);

// ---- export bundle ------------------------------------------------------------

struct ExportedRating {
  std::string rater;
  RaterKind kind = RaterKind::Crowd;
  std::array<int, 3> likert{};
  std::array<Bucket, 3> labels{};
  std::optional<bool> grammatical;
};

struct ExportEntry {
  std::string mr;
  std::string ref;
  Modality modality = Modality::Textual;
  int attr_count = 0;
  std::string worker;
  std::map<std::string, double> scores;
  std::vector<ExportedRating> ratings;
};

struct ExportBundle {
  std::vector<ExportEntry> entries;
  std::vector<ExclusionEntry> exclusions;
};

/// Applies the between-subject filter, then builds one entry per surviving
/// utterance in id order.
ExportBundle make_export_bundle(const Corpus& corpus);
/// Line format, field order fixed:
/// {"mr","ref","modality","attr_count","worker","scores","ratings"}
std::string export_line(const ExportEntry& entry);
void write_export(const ExportBundle& bundle, const std::filesystem::path& path);
ExportBundle export_corpus(const Corpus& corpus, const std::filesystem::path& path);
ExportBundle load_export(const std::filesystem::path& path, LoadOptions options = {});
/// Rebuilds a corpus from a bundle; utterance ids are assigned in line order.
Corpus corpus_from_bundle(const ExportBundle& bundle);

/// Header: utterance_id,rater_id,rater_kind,informativeness,naturalness,phrasing,grammatical
std::vector<RatingRecord> import_ratings_csv(const std::filesystem::path& path);
std::vector<RatingRecord> parse_ratings_csv(std::string_view text);

}  // namespace crowdnlg
