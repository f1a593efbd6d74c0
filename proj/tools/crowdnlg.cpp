// Command-line front end: MR generation, rendering, offline validation,
// similarity scoring, analysis, export and the HTTP service.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crowdnlg/analysis.hpp"
#include "crowdnlg/config.hpp"
#include "crowdnlg/mr_generator.hpp"
#include "crowdnlg/render.hpp"
#include "crowdnlg/rng.hpp"
#include "crowdnlg/server.hpp"
#include "crowdnlg/service.hpp"
#include "crowdnlg/similarity.hpp"
#include "crowdnlg/store.hpp"
#include "crowdnlg/validation.hpp"

namespace fs = std::filesystem;
using namespace crowdnlg;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
  } else {
    write_file(out_path, content);
  }
}

DomainSchema schema_or_default(const std::string& path) {
  return path.empty() ? default_schema() : load_schema(path);
}

std::map<int, int> parse_counts(const std::string& spec) {
  std::map<int, int> counts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("counts look like 3:25,5:25,8:25");
    counts[std::stoi(item.substr(0, colon))] = std::stoi(item.substr(colon + 1));
  }
  return counts;
}

HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdnlg: crowdsourced NLG data collection"};
  app.require_subcommand(1);

  // init
  std::string init_dir = "data";
  auto* init = app.add_subcommand("init", "Write default schema, validation, lexicon, config and glyph files");
  init->add_option("dir", init_dir, "Target directory")->capture_default_str();

  // gen-mrs
  std::string gen_counts = "3:25,5:25,8:25", gen_schema, gen_out = "-";
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen-mrs", "Generate a balanced MR set");
  gen->add_option("--counts", gen_counts, "complexity:count list")->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--schema", gen_schema, "Schema JSON (default: built-in)");
  gen->add_option("-o,--out", gen_out, "Output file")->capture_default_str();

  // render
  std::string render_mrs, render_schema, render_glyphs, render_out = "svg", export_glyphs;
  std::uint64_t render_seed = 1;
  auto* render_cmd = app.add_subcommand("render", "Render an MR set file to one SVG per MR");
  render_cmd->add_option("--mrs", render_mrs, "MR set file");
  render_cmd->add_option("--schema", render_schema);
  render_cmd->add_option("--glyphs", render_glyphs, "Directory of <glyph>.svg overrides");
  render_cmd->add_option("--seed", render_seed)->capture_default_str();
  render_cmd->add_option("-o,--out", render_out, "Output directory")->capture_default_str();
  render_cmd->add_option("--export-glyphs", export_glyphs, "Write the built-in glyphs to a directory and exit");

  // validate
  std::string val_input, val_schema, val_config, val_out = "-";
  auto* validate = app.add_subcommand("validate", "Validate submissions offline (JSON lines in, verdicts out)");
  validate->add_option("input", val_input, "Lines of {worker, mr, text, issued_at, submitted_at, country}")
      ->required();
  validate->add_option("--schema", val_schema);
  validate->add_option("--validation", val_config, "Validation config JSON");
  validate->add_option("-o,--out", val_out)->capture_default_str();

  // score
  std::string score_store, score_schema, score_lexicon, score_endpoint, score_cache, score_mr, score_text;
  auto* score = app.add_subcommand("score", "Semantic similarity scores");
  score->add_option("--store", score_store, "Score every stored utterance lacking a score");
  score->add_option("--mr", score_mr, "Score a single MR ...");
  score->add_option("--text", score_text, "... against this utterance");
  score->add_option("--schema", score_schema);
  score->add_option("--lexicon", score_lexicon);
  score->add_option("--endpoint", score_endpoint, "Remote similarity service (else $CROWDNLG_SIMILARITY_ENDPOINT)");
  score->add_option("--cache", score_cache, "Remote score cache (JSON lines)");

  // analyze
  std::string an_store, an_export, an_format = "text", an_out = "-", an_scorer;
  bool an_self = false;
  auto* analyze = app.add_subcommand("analyze", "Descriptive statistics, ANOVA, agreement and correlation");
  analyze->add_option("--store", an_store, "Record journal");
  analyze->add_option("--export", an_export, "Export file instead of a journal");
  analyze->add_option("--format", an_format)->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  analyze->add_option("--scorer", an_scorer, "baseline or remote (default: remote if present)");
  analyze->add_flag("--include-self", an_self, "Show self-evaluation sections");
  analyze->add_option("-o,--out", an_out)->capture_default_str();

  // export
  std::string ex_store, ex_out = "export.jsonl";
  auto* export_cmd = app.add_subcommand("export", "Write the filtered corpus export");
  export_cmd->add_option("--store", ex_store)->required();
  export_cmd->add_option("-o,--out", ex_out)->capture_default_str();

  // import-ratings
  std::string ir_store, ir_csv;
  auto* import_ratings = app.add_subcommand("import-ratings", "Append ratings from a CSV file");
  import_ratings->add_option("--store", ir_store)->required();
  import_ratings->add_option("csv", ir_csv)->required();

  // serve
  std::string sv_config = "data/config.json", sv_host;
  int sv_port = -1;
  auto* serve = app.add_subcommand("serve", "Run the HTTP collection service");
  serve->add_option("--config", sv_config)->capture_default_str();
  serve->add_option("--host", sv_host);
  serve->add_option("--port", sv_port, "0 picks a free port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*init) {
      const fs::path dir(init_dir);
      write_file(dir / "schema.json", schema_to_json(default_schema()) + "\n");
      write_file(dir / "validation.json", validation_config_to_json(ValidationConfig{}) + "\n");
      write_file(dir / "lexicon.json", lexicon_to_json(default_lexicon()) + "\n");
      write_file(dir / "config.json", default_config_json());
      render::GlyphLibrary::builtin().write_directory(dir / "glyphs");
      std::cout << "wrote defaults to " << dir << '\n';
    } else if (*gen) {
      MrSetRequest req;
      req.counts = parse_counts(gen_counts);
      req.seed = gen_seed;
      req.schema = schema_or_default(gen_schema);
      emit(gen_out, mr_set_to_json(generate_balanced_set(req), req.schema));
    } else if (*render_cmd) {
      auto config = render::default_render_config();
      if (!export_glyphs.empty()) {
        config.glyphs.write_directory(export_glyphs);
        return 0;
      }
      if (render_mrs.empty()) throw std::invalid_argument("--mrs is required");
      const auto schema = schema_or_default(render_schema);
      if (!render_glyphs.empty()) {
        const auto overrides = render::GlyphLibrary::load_directory(render_glyphs);
        for (const auto& [id, frag] : overrides.all()) {
          config.glyphs.set(id, frag);
        }
      }
      render::check_coverage(config, schema);
      fs::create_directories(render_out);
      const auto mrs = load_mr_set(render_mrs, schema);
      for (const auto& mr : mrs) {
        write_file(fs::path(render_out) / (mr.id + ".svg"), render::render_svg(mr, schema, config, render_seed ^ fnv1a(mr.id)));
      }
      std::cerr << "rendered " << mrs.size() << " MRs to " << render_out << '\n';
    } else if (*validate) {
      const auto schema = schema_or_default(val_schema);
      const auto vconf = val_config.empty() ? ValidationConfig{} : load_validation_config(val_config);
      std::ifstream in(val_input);
      if (!in) throw std::runtime_error("cannot open " + val_input);
      std::map<std::string, std::vector<std::string>> history;
      std::string line, out;
      std::size_t accepted = 0, rejected = 0;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = nlohmann::json::parse(line);
        Submission sub;
        sub.worker_id = j.at("worker").get<std::string>();
        sub.text = j.at("text").get<std::string>();
        const auto when = [&](const char* key) {
          const auto& v = j.at(key);
          return parse_timestamp(v.is_string() ? v.get<std::string>() : std::to_string(v.get<long long>()));
        };
        sub.issued_at = when("issued_at");
        sub.submitted_at = when("submitted_at");
        sub.country_code = j.value("country", "");
        const auto mr = parse_textual_mr(j.at("mr").get<std::string>(), schema);
        auto& hist = history[sub.worker_id];
        const auto report = validate_submission(sub, mr, schema, hist, vconf);
        nlohmann::ordered_json r;
        r["worker"] = sub.worker_id;
        r["accepted"] = report.accepted();
        r["failed"] = report.failed();
        out += r.dump() + "\n";
        if (report.accepted()) {
          hist.push_back(sub.text);
          ++accepted;
        } else {
          ++rejected;
        }
      }
      emit(val_out, out);
      std::cerr << accepted << " accepted, " << rejected << " rejected\n";
    } else if (*score) {
      const auto schema = schema_or_default(score_schema);
      const auto lexicon = score_lexicon.empty() ? default_lexicon() : load_lexicon(score_lexicon);
      const auto endpoint = RemoteSimilarityClient::resolve_endpoint(score_endpoint);
      SimilarityCache cache = score_cache.empty() ? SimilarityCache() : SimilarityCache(score_cache);
      std::optional<RemoteSimilarityClient> remote;
      if (!endpoint.empty()) remote.emplace(endpoint, cache);
      if (!score_mr.empty()) {
        const auto mr = parse_textual_mr(score_mr, schema);
        const double raw = remote ? remote->score(score_mr, score_text) : score_baseline(mr, score_text, schema, lexicon);
        const auto s = make_score(raw);
        std::cout << "raw=" << s.raw << " normalized=" << s.normalized << " bucket=" << to_string(s.bucket) << '\n';
      } else {
        if (score_store.empty()) throw std::invalid_argument("give --store or --mr/--text");
        RecordStore store(score_store);
        const auto corpus = store.snapshot();
        std::set<std::pair<std::string, std::string>> have;
        for (const auto& s : corpus.scores) have.emplace(s.utterance_id, s.scorer);
        std::size_t added = 0;
        for (const auto& u : corpus.utterances) {
          if (!have.count({u.id, "baseline"})) {
            store.append(ScoreRecord{u.id, "baseline", score_baseline(parse_textual_mr(u.mr_text, schema), u.text, schema, lexicon)});
            ++added;
          }
          if (remote && !have.count({u.id, "remote"})) {
            try {
              store.append(ScoreRecord{u.id, "remote", remote->score(u.mr_text, u.text)});
              ++added;
            } catch (const SimilarityError& e) {
              std::cerr << "warning: " << u.id << ": " << e.what() << '\n';
            }
          }
        }
        std::cerr << "added " << added << " scores\n";
      }
    } else if (*analyze) {
      Corpus corpus;
      if (!an_export.empty()) {
        corpus = corpus_from_bundle(load_export(an_export));
      } else if (!an_store.empty()) {
        corpus = load_corpus(an_store);
      } else {
        throw std::invalid_argument("give --store or --export");
      }
      analysis::AnalysisOptions options;
      options.include_self = an_self;
      options.scorer = an_scorer;
      const auto report = analysis::analyze(corpus, options);
      emit(an_out, an_format == "json" ? analysis::report_to_json(report) + "\n" : analysis::report_to_text(report));
    } else if (*export_cmd) {
      const auto bundle = export_corpus(load_corpus(ex_store), ex_out);
      std::cerr << "exported " << bundle.entries.size() << " utterances to " << ex_out << '\n';
      for (const auto& e : bundle.exclusions) {
        std::cerr << "excluded " << e.excluded << " pictorial utterance(s) of " << e.worker_id << '\n';
      }
    } else if (*import_ratings) {
      RecordStore store(ir_store);
      const auto corpus = store.snapshot();
      std::size_t n = 0;
      for (auto& r : import_ratings_csv(ir_csv)) {
        if (!corpus.find_utterance(r.utterance_id)) throw std::invalid_argument("no utterance " + r.utterance_id);
        store.append(std::move(r));
        ++n;
      }
      std::cerr << "imported " << n << " ratings\n";
    } else if (*serve) {
      auto config = load_config(sv_config);
      apply_env_overrides(config);
      if (!sv_host.empty()) config.host = sv_host;
      if (sv_port >= 0) config.port = sv_port;
      CollectionService service(service_options_from_config(config));
      HttpServer server(service, config.token);
      const int port = server.bind(config.host, config.port);
      if (port < 0) throw std::runtime_error("cannot bind " + config.host + ":" + std::to_string(config.port));
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << config.host << ":" << port << std::endl;
      server.listen();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
