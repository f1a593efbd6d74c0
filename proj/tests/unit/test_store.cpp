#include <doctest.h>

#include <algorithm>
#include <thread>

#include "../support.hpp"
#include "crowdnlg/store.hpp"

using namespace crowdnlg;
using namespace std::chrono_literals;

namespace {

UtteranceRecord utterance(const std::string& worker, Modality m, const std::string& text, int attrs = 3) {
  UtteranceRecord u;
  u.worker_id = worker;
  u.mr_id = "mr-" + std::to_string(attrs);
  u.mr_text = "name[Aromi], eatType[pub], area[riverside]";
  u.attr_count = attrs;
  u.text = text;
  u.modality = m;
  u.batch_id = m == Modality::Textual ? "text" : "pict";
  u.task_id = "t000001";
  u.issued_at = Timestamp(100s);
  u.submitted_at = Timestamp(160s);
  u.country_code = "GB";
  return u;
}

RatingRecord crowd(const std::string& utterance_id, const std::string& rater, int i, int n, int p) {
  RatingRecord r;
  r.utterance_id = utterance_id;
  r.rater_id = rater;
  r.kind = RaterKind::Crowd;
  r.likert = {i, n, p};
  r.grammatical = true;
  return r;
}

RatingRecord self_rating(const std::string& utterance_id, Bucket b) {
  RatingRecord r;
  r.utterance_id = utterance_id;
  r.rater_id = "self";
  r.kind = RaterKind::Self;
  r.labels = {b, Bucket::Average, Bucket::LowerThanAverage};
  return r;
}

std::size_t count_modality(const Corpus& c, Modality m) {
  return static_cast<std::size_t>(
      std::count_if(c.utterances.begin(), c.utterances.end(), [&](const auto& u) { return u.modality == m; }));
}

}  // namespace

TEST_SUITE("corpus_store") {

TEST_CASE("ids are sequential and survive reopening") {
  testing_support::TempDir dir;
  const auto path = dir / "corpus.jsonl";
  {
    RecordStore store(path);
    TaskRecord t;
    t.mr_id = "mr-001";
    t.batch_id = "text";
    t.worker_id = "w1";
    t.issued_at = Timestamp(10s);
    CHECK(store.append(t) == "t000001");
    CHECK(store.append(utterance("w1", Modality::Textual, "Aromi is a pub.")) == "u000001");
    CHECK(store.append(crowd("u000001", "c1", 4, 5, 6)) == "r000001");
    store.close_task("t000001", TaskStatus::Submitted);
    store.append(ScoreRecord{"u000001", "baseline", 0.75});
  }
  RecordStore reopened(path);
  const auto c = reopened.snapshot();
  REQUIRE(c.tasks.size() == 1);
  CHECK(c.tasks[0].status == TaskStatus::Submitted);
  CHECK(c.tasks[0].issued_at == Timestamp(10s));
  REQUIRE(c.utterances.size() == 1);
  CHECK(c.utterances[0].text == "Aromi is a pub.");
  CHECK(c.utterances[0].submitted_at == Timestamp(160s));
  REQUIRE(c.ratings.size() == 1);
  CHECK(c.ratings[0].likert == std::array<int, 3>{4, 5, 6});
  REQUIRE(c.scores.size() == 1);
  CHECK(c.scores[0].raw == 0.75);
  CHECK(reopened.append(utterance("w2", Modality::Textual, "x")) == "u000002");
  CHECK(reopened.append(self_rating("u000002", Bucket::Average)) == "r000002");
}

TEST_CASE("rating scale checks") {
  auto bad = crowd("u1", "c", 7, 1, 1);
  CHECK_THROWS_AS(check_rating(bad), std::invalid_argument);
  CHECK_NOTHROW(check_rating(crowd("u1", "c", 1, 6, 3)));
  testing_support::TempDir dir;
  RecordStore store(dir / "c.jsonl");
  CHECK_THROWS_AS(store.append(bad), std::invalid_argument);
}

TEST_CASE("rating_from_json") {
  const auto r = rating_from_json(
      R"({"utterance_id":"u000003","rater":"c9","kind":"crowd","informativeness":5,"naturalness":4,"phrasing":3})");
  CHECK(r.utterance_id == "u000003");
  CHECK(r.kind == RaterKind::Crowd);
  CHECK(r.likert == std::array<int, 3>{5, 4, 3});
  const auto s = rating_from_json(
      R"({"utterance_id":"u1","rater":"w","kind":"self","informativeness":"average","naturalness":"higher_than_average","phrasing":"lower_than_average"})");
  CHECK(s.labels[1] == Bucket::HigherThanAverage);
  CHECK_THROWS_AS(rating_from_json(R"({"utterance_id":"u1"})"), std::invalid_argument);
  CHECK_THROWS_AS(rating_from_json("not json"), std::invalid_argument);
}

TEST_CASE("truncated final line is reported with its line number") {
  testing_support::TempDir dir;
  const auto path = dir / "corpus.jsonl";
  {
    RecordStore store(path);
    store.append(utterance("w1", Modality::Textual, "one"));
    store.append(utterance("w1", Modality::Textual, "two"));
  }
  {
    std::ofstream out(path, std::ios::app);
    out << R"({"type":"utterance","id":"u000003","te)";
  }
  try {
    load_corpus(path);
    FAIL("expected CorruptRecord");
  } catch (const CorruptRecord& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS([&] { RecordStore reopened(path); }(), CorruptRecord);
  LoadOptions skip;
  skip.skip_corrupt = true;
  CHECK(load_corpus(path, skip).utterances.size() == 2);
  RecordStore tolerant(path, skip);
  CHECK(tolerant.skipped_lines() == 1);
}

TEST_CASE("concurrent appends produce whole lines") {
  testing_support::TempDir dir;
  const auto path = dir / "corpus.jsonl";
  {
    RecordStore store(path);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&, t] {
        for (int i = 0; i < 50; ++i) {
          store.append(utterance("w" + std::to_string(t), Modality::Textual, std::string(200, 'a' + t)));
        }
      });
    }
    for (auto& th : threads) th.join();
  }
  const auto c = load_corpus(path);
  CHECK(c.utterances.size() == 200);
  std::set<std::string> ids;
  for (const auto& u : c.utterances) ids.insert(u.id);
  CHECK(ids.size() == 200);
}

TEST_CASE("between-subject filter: hand-enumerated example") {
  // w1 contributes to both conditions; w2 and w3 to one each.
  Corpus c;
  auto add = [&](const std::string& id, const std::string& w, Modality m) {
    auto u = utterance(w, m, id);
    u.id = id;
    c.utterances.push_back(u);
  };
  add("u1", "w1", Modality::Textual);
  add("u2", "w1", Modality::Pictorial);
  add("u3", "w1", Modality::Pictorial);
  add("u4", "w2", Modality::Pictorial);
  add("u5", "w3", Modality::Textual);
  c.ratings.push_back(crowd("u2", "c", 3, 3, 3));
  c.ratings.push_back(crowd("u4", "c", 3, 3, 3));
  c.scores.push_back({"u3", "baseline", 0.5});
  c.scores.push_back({"u5", "baseline", 0.5});

  const auto f = apply_between_subject_filter(c);
  std::vector<std::string> kept;
  for (const auto& u : f.corpus.utterances) kept.push_back(u.id);
  CHECK(kept == std::vector<std::string>{"u1", "u4", "u5"});
  REQUIRE(f.exclusions.size() == 1);
  CHECK(f.exclusions[0].worker_id == "w1");
  CHECK(f.exclusions[0].excluded == 2);
  REQUIRE(f.corpus.ratings.size() == 1);
  CHECK(f.corpus.ratings[0].utterance_id == "u4");
  REQUIRE(f.corpus.scores.size() == 1);
  CHECK(f.corpus.scores[0].utterance_id == "u5");
}

TEST_CASE("between-subject filter properties over generated corpora") {
  for (int seed = 0; seed < 20; ++seed) {
    Corpus c;
    std::uint32_t state = static_cast<std::uint32_t>(seed) * 2654435761u + 1;
    auto next = [&] {
      state = state * 1664525u + 1013904223u;
      return state >> 8;
    };
    for (int i = 0; i < 60; ++i) {
      auto u = utterance("w" + std::to_string(next() % 8), next() % 2 ? Modality::Textual : Modality::Pictorial,
                         "x" + std::to_string(i));
      u.id = "u" + std::to_string(i);
      c.utterances.push_back(u);
    }
    const auto once = apply_between_subject_filter(c);
    const auto twice = apply_between_subject_filter(once.corpus);
    CHECK(twice.corpus.utterances.size() == once.corpus.utterances.size());
    CHECK(twice.exclusions.empty());
    CHECK(count_modality(once.corpus, Modality::Textual) == count_modality(c, Modality::Textual));
    std::map<std::string, std::set<Modality>> seen;
    for (const auto& u : once.corpus.utterances) seen[u.worker_id].insert(u.modality);
    for (const auto& [w, ms] : seen) CHECK(ms.size() == 1);
    std::size_t excluded = 0;
    for (const auto& e : once.exclusions) excluded += e.excluded;
    CHECK(excluded + once.corpus.utterances.size() == c.utterances.size());
  }
}

TEST_CASE("distinct utterance count folds case and whitespace") {
  Corpus c;
  for (const auto* t : {"A cheap pub.", "a  cheap pub.", "A cheap pub!", "Near the river.", " NEAR the river. "}) {
    c.utterances.push_back(utterance("w", Modality::Textual, t));
  }
  CHECK(distinct_utterance_count(c) == 3);
  c.utterances.push_back(utterance("w", Modality::Textual, "Something else."));
  CHECK(distinct_utterance_count(c) == 4);
}

TEST_CASE("export line field order") {
  ExportEntry e;
  e.mr = "name[Aromi]";
  e.ref = "Aromi.";
  e.modality = Modality::Pictorial;
  e.attr_count = 1;
  e.worker = "w1";
  e.scores = {{"baseline", 1.0}};
  ExportedRating r;
  r.rater = "c1";
  r.likert = {5, 4, 3};
  e.ratings.push_back(r);
  const auto line = export_line(e);
  std::vector<std::size_t> positions;
  for (const auto* key : {"\"mr\"", "\"ref\"", "\"modality\"", "\"attr_count\"", "\"worker\"", "\"scores\"",
                          "\"ratings\""}) {
    positions.push_back(line.find(key));
  }
  CHECK(std::is_sorted(positions.begin(), positions.end()));
  CHECK(std::find(positions.begin(), positions.end(), std::string::npos) == positions.end());
  CHECK(line.find('\n') == std::string::npos);
  const auto j = nlohmann::json::parse(line);
  CHECK(j.at("modality") == "pictorial");
  CHECK(j.at("ratings")[0].at("informativeness") == 5);
}

TEST_CASE("export and reload round trip") {
  testing_support::TempDir dir;
  RecordStore store(dir / "corpus.jsonl");
  for (int i = 0; i < 10; ++i) {
    const auto m = i < 5 ? Modality::Textual : Modality::Pictorial;
    auto u = utterance("w" + std::to_string(i), m, "Utterance number " + std::to_string(i) + ".", 3 + (i % 3));
    u.mr_text = "name[Place " + std::to_string(i) + "]";
    const auto id = store.append(u);
    store.append(crowd(id, "c1", 1 + i % 6, 2, 3));
    store.append(self_rating(id, Bucket::HigherThanAverage));
    store.append(ScoreRecord{id, "baseline", i / 10.0});
  }
  const auto bundle = export_corpus(store.snapshot(), dir / "export.jsonl");
  CHECK(bundle.entries.size() == 10);
  const auto back = load_export(dir / "export.jsonl");
  REQUIRE(back.entries.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CAPTURE(i);
    const auto& a = bundle.entries[i];
    const auto& b = back.entries[i];
    CHECK(a.mr == b.mr);
    CHECK(a.ref == b.ref);
    CHECK(a.modality == b.modality);
    CHECK(a.attr_count == b.attr_count);
    CHECK(a.worker == b.worker);
    CHECK(a.scores == b.scores);
    REQUIRE(a.ratings.size() == b.ratings.size());
    for (std::size_t k = 0; k < a.ratings.size(); ++k) {
      CHECK(a.ratings[k].rater == b.ratings[k].rater);
      CHECK(a.ratings[k].kind == b.ratings[k].kind);
      if (a.ratings[k].kind == RaterKind::Crowd) {
        CHECK(a.ratings[k].likert == b.ratings[k].likert);
      } else {
        CHECK(a.ratings[k].labels == b.ratings[k].labels);
      }
    }
  }
  // Reloading then re-exporting produces identical bytes.
  write_export(back, dir / "again.jsonl");
  CHECK(testing_support::slurp(dir / "again.jsonl") == testing_support::slurp(dir / "export.jsonl"));

  const auto rebuilt = corpus_from_bundle(back);
  CHECK(rebuilt.utterances.size() == 10);
  CHECK(rebuilt.ratings.size() == 20);
  CHECK(rebuilt.scores.size() == 10);
}

TEST_CASE("export applies the between-subject filter") {
  Corpus c;
  auto a = utterance("w1", Modality::Textual, "a");
  a.id = "u1";
  auto b = utterance("w1", Modality::Pictorial, "b");
  b.id = "u2";
  c.utterances = {a, b};
  const auto bundle = make_export_bundle(c);
  REQUIRE(bundle.entries.size() == 1);
  CHECK(bundle.entries[0].ref == "a");
  REQUIRE(bundle.exclusions.size() == 1);
}

TEST_CASE("ratings CSV") {
  const std::string csv =
      "utterance_id,rater_id,rater_kind,informativeness,naturalness,phrasing,grammatical\n"
      "u000001,c1,crowd,5,4,6,yes\n"
      "u000001,w1,self,average,higher_than_average,lower_than_average,\n"
      "\"u000002\",\"c, 2\",crowd,1,1,1,false\n";
  const auto rows = parse_ratings_csv(csv);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].likert == std::array<int, 3>{5, 4, 6});
  CHECK(rows[0].grammatical == true);
  CHECK(rows[1].kind == RaterKind::Self);
  CHECK_FALSE(rows[1].grammatical.has_value());
  CHECK(rows[2].rater_id == "c, 2");
  CHECK(rows[2].grammatical == false);

  try {
    parse_ratings_csv("id,rater\nu1,c1\n");
    FAIL("expected CorruptRecord");
  } catch (const CorruptRecord& e) {
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(parse_ratings_csv("utterance_id,rater_id,rater_kind,informativeness,naturalness,phrasing,"
                                    "grammatical\nu1,c1,crowd,9,1,1,\n"),
                  CorruptRecord);

  testing_support::TempDir dir;
  {
    std::ofstream out(dir / "r.csv");
    out << csv;
  }
  CHECK(import_ratings_csv(dir / "r.csv").size() == 3);
}

}  // TEST_SUITE
