#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "../support.hpp"
#include "crowdnlg/mr_generator.hpp"
#include "crowdnlg/server.hpp"
#include "crowdnlg/service.hpp"

using namespace crowdnlg;
using namespace std::chrono_literals;

namespace {

// Manually advanced clock shared with the service.
struct FakeClock {
  std::shared_ptr<std::atomic<long long>> now = std::make_shared<std::atomic<long long>>(1'700'000'000);
  Clock clock() const {
    auto n = now;
    return [n] { return Timestamp(std::chrono::seconds(n->load())); };
  }
  void advance(long long s) const { *now += s; }
};

std::vector<MeaningRepresentation> small_mrs() {
  const auto schema = default_schema();
  std::vector<MeaningRepresentation> mrs;
  const std::vector<std::string> texts = {"name[Aromi], eatType[pub], area[riverside]",
                                          "name[Loch Fyne], food[Japanese], priceRange[cheap]",
                                          "name[The Mill], familyFriendly[No], near[Cafe Adriatic]",
                                          "name[Zizzi], eatType[restaurant], customerRating[5 of 5 (high)]"};
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto mr = parse_textual_mr(texts[i], schema);
    mr.id = "mr-00" + std::to_string(i + 1);
    mrs.push_back(mr);
  }
  return mrs;
}

ServiceOptions options_for(const testing_support::TempDir& dir, const FakeClock& clock, int quota = 3) {
  ServiceOptions o;
  o.mrs = small_mrs();
  BatchConfig text;
  text.id = "textual";
  text.modality = Modality::Textual;
  text.max_pages_per_worker = quota;
  BatchConfig pict = text;
  pict.id = "pictorial";
  pict.modality = Modality::Pictorial;
  o.batches = {text, pict};
  o.store = dir / "corpus.jsonl";
  o.clock = clock.clock();
  o.resolver = std::make_shared<StaticCountryResolver>("GB");
  return o;
}

// A valid utterance for each of the small MRs.
std::string answer_for(const std::string& mr_id) {
  static const std::map<std::string, std::string> answers = {
      {"mr-001", "Aromi is a pub on the riverside."},
      {"mr-002", "Loch Fyne serves cheap Japanese food."},
      {"mr-003", "The Mill is near Cafe Adriatic and is not family friendly."},
      {"mr-004", "Zizzi is a restaurant with a five star rating."}};
  return answers.at(mr_id);
}

ServiceError::Kind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.kind();
  }
  FAIL("no ServiceError thrown");
  return ServiceError::Kind::InvalidRequest;
}

}  // namespace

TEST_SUITE("collection_service") {

TEST_CASE("country resolvers") {
  RequestContext ctx;
  ctx.remote_addr = "81.2.69.160";
  ctx.headers["x-country-code"] = "gb";
  CHECK(HeaderCountryResolver("X-Country-Code").resolve(ctx) == "GB");
  CHECK(StaticCountryResolver("US").resolve(ctx) == "US");
  using Prefixes = std::map<std::string, std::string>;
  CHECK(PrefixCountryResolver(Prefixes{{"81.", "GB"}, {"81.2.", "IE"}, {"10.", "US"}}).resolve(ctx) == "IE");
  CHECK(PrefixCountryResolver(Prefixes{{"10.", "US"}}).resolve(ctx).empty());
  CountryResolverConfig c;
  c.kind = "static";
  c.code = "CA";
  CHECK(make_country_resolver(c)->resolve(ctx) == "CA");
}

TEST_CASE("issues distinct MRs and stops at the quota") {
  testing_support::TempDir dir;
  FakeClock clock;
  CollectionService svc(options_for(dir, clock, 3));
  std::set<std::string> mrs;
  for (int i = 0; i < 3; ++i) {
    const auto t = svc.next_task("w1", "textual");
    REQUIRE(t.task.has_value());
    mrs.insert(t.task->mr_id);
    clock.advance(30);
    CHECK(svc.submit(t.task->id, "w1", answer_for(t.task->mr_id)).accepted);
  }
  CHECK(mrs.size() == 3);
  const auto done = svc.next_task("w1", "textual");
  CHECK_FALSE(done.task.has_value());
  CHECK(done.reason.find("quota") != std::string::npos);
}

TEST_CASE("open tasks count toward the quota") {
  testing_support::TempDir dir;
  FakeClock clock;
  CollectionService svc(options_for(dir, clock, 2));
  CHECK(svc.next_task("w1", "textual").task);
  CHECK(svc.next_task("w1", "textual").task);
  CHECK_FALSE(svc.next_task("w1", "textual").task);
}

TEST_CASE("exhausted when every MR has been seen") {
  testing_support::TempDir dir;
  FakeClock clock;
  CollectionService svc(options_for(dir, clock, 10));
  for (int i = 0; i < 4; ++i) {
    const auto t = svc.next_task("w1", "textual");
    REQUIRE(t.task);
    clock.advance(25);
    REQUIRE(svc.submit(t.task->id, "w1", answer_for(t.task->mr_id)).accepted);
  }
  const auto none = svc.next_task("w1", "textual");
  CHECK_FALSE(none.task);
  CHECK(none.reason.find("no unanswered MR") != std::string::npos);
}

TEST_CASE("least-loaded MR is issued first") {
  testing_support::TempDir dir;
  FakeClock clock;
  CollectionService svc(options_for(dir, clock, 10));
  std::map<std::string, int> counts;
  for (int w = 0; w < 8; ++w) counts[svc.next_task("w" + std::to_string(w), "textual").task->mr_id]++;
  for (const auto& [id, n] : counts) CHECK(n == 2);
}

TEST_CASE("racing next_task calls from one worker never exceed the quota or repeat an MR") {
  testing_support::TempDir dir;
  FakeClock clock;
  CollectionService svc(options_for(dir, clock, 3));
  std::mutex m;
  std::vector<std::string> issued;
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      const auto t = svc.next_task("w1", "textual");
      if (t.task) {
        std::lock_guard lock(m);
        issued.push_back(t.task->mr_id);
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(issued.size() == 3);
  CHECK(std::set<std::string>(issued.begin(), issued.end()).size() == 3);
}

TEST_CASE("submission outcomes") {
  testing_support::TempDir dir;
  FakeClock clock;
  auto opts = options_for(dir, clock, 4);
  auto resolver = std::make_shared<HeaderCountryResolver>("X-Country-Code");
  opts.resolver = resolver;
  CollectionService svc(opts);
  RequestContext gb;
  gb.headers["x-country-code"] = "GB";
  RequestContext fr;
  fr.headers["x-country-code"] = "FR";

  const auto t1 = *svc.next_task("w1", "textual").task;
  clock.advance(5);
  auto fast = svc.submit(t1.id, "w1", answer_for(t1.mr_id), gb);
  CHECK_FALSE(fast.accepted);
  CHECK(fast.report.failed() == std::vector<std::string>{"timing"});

  clock.advance(30);
  auto foreign = svc.submit(t1.id, "w1", answer_for(t1.mr_id), fr);
  CHECK(foreign.report.failed() == std::vector<std::string>{"locale"});

  auto ok = svc.submit(t1.id, "w1", answer_for(t1.mr_id), gb);
  CHECK(ok.accepted);
  CHECK(ok.utterance_id == "u000001");
  CHECK(kind_of([&] { svc.submit(t1.id, "w1", "again", gb); }) == ServiceError::Kind::TaskAlreadyClosed);

  const auto t2 = *svc.next_task("w1", "textual").task;
  clock.advance(30);
  const auto dup = svc.submit(t2.id, "w1", answer_for(t1.mr_id), gb);
  CHECK_FALSE(dup.accepted);
  CHECK_FALSE(dup.report.find("duplicate")->pass);

  CHECK(kind_of([&] { svc.submit("t999999", "w1", "x", gb); }) == ServiceError::Kind::NoSuchTask);
  CHECK(kind_of([&] { svc.submit(t2.id, "someone-else", "x", gb); }) == ServiceError::Kind::NoSuchTask);

  const auto c = svc.snapshot();
  REQUIRE(c.utterances.size() == 1);
  CHECK(c.utterances[0].country_code == "GB");
  CHECK(c.utterances[0].mr_text == canonical_text(svc.mr(t1.mr_id), default_schema()));
  REQUIRE(c.scores.size() == 1);
  CHECK(c.scores[0].scorer == "baseline");
  CHECK(c.scores[0].raw == doctest::Approx(1.0));
}

TEST_CASE("expired tasks are closed and their MR can be issued again") {
  testing_support::TempDir dir;
  FakeClock clock;
  auto opts = options_for(dir, clock, 1);
  opts.task_ttl_seconds = 600;
  CollectionService svc(opts);
  const auto first = *svc.next_task("w1", "textual").task;
  CHECK_FALSE(svc.next_task("w1", "textual").task);
  clock.advance(601);
  const auto second = svc.next_task("w1", "textual");
  REQUIRE(second.task);
  CHECK(kind_of([&] { svc.submit(first.id, "w1", answer_for(first.mr_id)); }) ==
        ServiceError::Kind::TaskAlreadyClosed);
  const auto c = svc.snapshot();
  CHECK(c.tasks[0].status == TaskStatus::Expired);
}

TEST_CASE("batch errors") {
  testing_support::TempDir dir;
  FakeClock clock;
  auto opts = options_for(dir, clock);
  opts.batches[1].open_until = Timestamp(1000s);
  CollectionService svc(opts);
  CHECK(kind_of([&] { svc.next_task("w1", "nope"); }) == ServiceError::Kind::UnknownBatch);
  CHECK(kind_of([&] { svc.next_task("w1", "pictorial"); }) == ServiceError::Kind::BatchClosed);
  CHECK(kind_of([&] { svc.mr("mr-404"); }) == ServiceError::Kind::UnknownMr);
}

TEST_CASE("ratings") {
  testing_support::TempDir dir;
  FakeClock clock;
  CollectionService svc(options_for(dir, clock));
  const auto t = *svc.next_task("w1", "textual").task;
  clock.advance(40);
  const auto uid = svc.submit(t.id, "w1", answer_for(t.mr_id)).utterance_id;

  RatingRecord r;
  r.utterance_id = uid;
  r.rater_id = "c1";
  r.likert = {5, 5, 4};
  CHECK(svc.rate(r) == "r000001");
  CHECK(kind_of([&] { svc.rate(r); }) == ServiceError::Kind::DuplicateRating);
  RatingRecord self = r;
  self.kind = RaterKind::Self;
  self.rater_id = "c1";
  self.labels = {Bucket::Average, Bucket::Average, Bucket::Average};
  CHECK(svc.rate(self) == "r000002");
  r.utterance_id = "u424242";
  CHECK(kind_of([&] { svc.rate(r); }) == ServiceError::Kind::NoSuchUtterance);
  r.utterance_id = uid;
  r.rater_id = "c2";
  r.likert = {0, 1, 1};
  CHECK(kind_of([&] { svc.rate(r); }) == ServiceError::Kind::InvalidRequest);
}

TEST_CASE("state survives a restart") {
  testing_support::TempDir dir;
  FakeClock clock;
  std::string mr_first;
  {
    CollectionService svc(options_for(dir, clock, 2));
    const auto t = *svc.next_task("w1", "textual").task;
    mr_first = t.mr_id;
    clock.advance(30);
    REQUIRE(svc.submit(t.id, "w1", answer_for(t.mr_id)).accepted);
  }
  CollectionService again(options_for(dir, clock, 2));
  const auto t = again.next_task("w1", "textual");
  REQUIRE(t.task);
  CHECK(t.task->mr_id != mr_first);
  CHECK_FALSE(again.next_task("w1", "textual").task);
}

TEST_CASE("MR presentation is deterministic per id") {
  testing_support::TempDir dir;
  FakeClock clock;
  CollectionService svc(options_for(dir, clock));
  CHECK(svc.mr_text("mr-003") == svc.mr_text("mr-003"));
  CHECK(parse_textual_mr(svc.mr_text("mr-003"), default_schema()).pairs.size() == 3);
  CHECK(svc.mr_svg("mr-003").find("<svg") != std::string::npos);
}

TEST_CASE("remote scores are recorded when an endpoint is configured") {
  httplib::Server stub;
  stub.Get("/api", [](const httplib::Request&, httplib::Response& res) { res.set_content("0.9", "text/plain"); });
  const int port = stub.bind_to_any_port("127.0.0.1");
  std::thread th([&] { stub.listen_after_bind(); });
  stub.wait_until_ready();

  testing_support::TempDir dir;
  FakeClock clock;
  auto opts = options_for(dir, clock);
  opts.cache = std::make_shared<SimilarityCache>(dir / "cache.jsonl");
  opts.remote = std::make_shared<RemoteSimilarityClient>("http://127.0.0.1:" + std::to_string(port) + "/api",
                                                          *opts.cache, 5);
  CollectionService svc(opts);
  const auto t = *svc.next_task("w1", "textual").task;
  clock.advance(30);
  REQUIRE(svc.submit(t.id, "w1", answer_for(t.mr_id)).accepted);
  stub.stop();
  th.join();

  const auto c = svc.snapshot();
  REQUIRE(c.scores.size() == 2);
  CHECK(c.scores[1].scorer == "remote");
  CHECK(c.scores[1].raw == doctest::Approx(0.9));
  CHECK(svc.score_remote() == 0);
}

TEST_CASE("HTTP endpoints") {
  testing_support::TempDir dir;
  FakeClock clock;
  auto opts = options_for(dir, clock, 2);
  opts.resolver.reset();
  CollectionService svc(opts);
  HttpServer server(svc, "sekret");
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread th([&] { server.listen(); });
  server.wait_until_ready();

  httplib::Client anon("127.0.0.1", port);
  CHECK(anon.Get("/batches/textual/next-task?worker=w1")->status == 401);

  httplib::Client cli("127.0.0.1", port);
  cli.set_bearer_token_auth("sekret");
  cli.set_default_headers({{"X-Country-Code", "US"}});

  auto res = cli.Get("/batches/textual/next-task?worker=w1");
  REQUIRE(res);
  CHECK(res->status == 200);
  auto body = nlohmann::json::parse(res->body);
  CHECK(body.at("status") == "issued");
  const auto task_id = body.at("task_id").get<std::string>();
  const auto mr_id = body.at("mr_id").get<std::string>();
  CHECK(body.at("mr_url") == "/mrs/" + mr_id + ".txt");
  CHECK(body.at("modality") == "textual");

  res = cli.Get(body.at("mr_url").get<std::string>());
  CHECK(res->status == 200);
  CHECK(res->body == svc.mr_text(mr_id));
  res = cli.Get("/mrs/" + mr_id + ".svg");
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == "image/svg+xml");
  CHECK(cli.Get("/mrs/mr-999.txt")->status == 404);
  CHECK(cli.Get("/batches/nope/next-task?worker=w1")->status == 404);
  CHECK(cli.Get("/batches/textual/next-task")->status == 400);

  const auto submission = [&](const std::string& text) {
    return nlohmann::json{{"task_id", task_id}, {"worker", "w1"}, {"text", text}}.dump();
  };
  res = cli.Post("/submissions", submission("%%%"), "application/json");
  CHECK(res->status == 422);
  body = nlohmann::json::parse(res->body);
  CHECK(body.at("status") == "rejected");
  CHECK(body.at("verdicts").size() == 6);

  clock.advance(45);
  res = cli.Post("/submissions", submission(answer_for(mr_id)), "application/json");
  CHECK(res->status == 200);
  body = nlohmann::json::parse(res->body);
  CHECK(body.at("status") == "accepted");
  const auto uid = body.at("utterance_id").get<std::string>();
  CHECK(cli.Post("/submissions", submission(answer_for(mr_id)), "application/json")->status == 409);
  CHECK(cli.Post("/submissions", "{not json", "application/json")->status == 400);

  const auto rating = nlohmann::json{{"utterance_id", uid}, {"rater", "c1"}, {"kind", "crowd"},
                                     {"informativeness", 6}, {"naturalness", 5}, {"phrasing", 5}};
  res = cli.Post("/ratings", rating.dump(), "application/json");
  CHECK(res->status == 201);
  CHECK(nlohmann::json::parse(res->body).at("id") == "r000001");
  CHECK(cli.Post("/ratings", rating.dump(), "application/json")->status == 409);
  auto orphan = rating;
  orphan["utterance_id"] = "u999999";
  CHECK(cli.Post("/ratings", orphan.dump(), "application/json")->status == 404);

  res = cli.Get("/export");
  CHECK(res->status == 200);
  const auto line = nlohmann::json::parse(res->body.substr(0, res->body.find('\n')));
  CHECK(line.at("ref") == answer_for(mr_id));
  CHECK(line.at("worker") == "w1");

  // Single-condition corpus: the report still renders with per-test errors.
  res = cli.Get("/report");
  CHECK(res->status == 200);
  res = cli.Get("/report?format=text");
  CHECK(res->status == 200);

  cli.Get("/batches/textual/next-task?worker=w1");
  body = nlohmann::json::parse(cli.Get("/batches/textual/next-task?worker=w1")->body);
  CHECK(body.at("status") == "exhausted");

  server.stop();
  th.join();
}

}  // TEST_SUITE
