// tweetlens: command-line front end over a workspace directory.
//
// Settings are layered: built-in defaults, then the workspace's saved
// settings, then --config (key=value lines), then flags. The merged result is
// saved back so later stages see earlier choices.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tweetlens/errors.hpp"
#include "tweetlens/pipelines.hpp"

namespace {

using nlohmann::json;
using namespace tweetlens;

const std::set<std::string> kStringKeys = {"input", "from", "to", "backend", "format"};

std::string key_of(std::string flag) {
  for (auto& c : flag) {
    if (c == '-') c = '_';
  }
  return flag;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

json config_value(const std::string& key, const std::string& raw) {
  if (key == "exclude") {
    json terms = json::array();
    std::size_t start = 0;
    while (start <= raw.size()) {
      const auto comma = raw.find(',', start);
      const auto term = trim(raw.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (!term.empty()) terms.push_back(term);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return terms;
  }
  if (kStringKeys.count(key)) return raw;
  const json parsed = json::parse(raw, nullptr, false);
  if (parsed.is_discarded()) throw InputError("config value for " + key + " is not a number: " + raw);
  return parsed;
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  json out = json::object();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(path + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = key_of(trim(line.substr(0, eq)));
    out[key] = config_value(key, trim(line.substr(eq + 1)));
  }
  return out;
}

template <typename T>
void flag(CLI::App* cmd, json& overrides, const std::string& name, const std::string& help) {
  const std::string key = key_of(name);
  cmd->add_option_function<T>(
      "--" + name, [&overrides, key](const T& v) { overrides[key] = v; }, help);
}

void print_needs(const json& needs) {
  std::cout << "labels with first-person tweets: " << needs["labels"].size() << "\n";
  for (const auto& l : needs["labels"]) {
    std::cout << "  " << l["label"].get<std::string>() << ": median " << l["median_compound"] << " over "
              << l["first_person_tweets"] << "\n";
  }
  std::cout << "summarized: " << needs["negative_labels"].dump() << "\n";
}

void print_narratives(const json& n) {
  std::cout << "users " << n["users"] << ", edges " << n["edges"] << ", discourse clusters " << n["discourse"]["k"]
            << " (silhouette " << n["discourse"]["silhouette"] << "), communities " << n["community"]["communities"]
            << " (modularity " << n["community"]["modularity"] << ")\n";
  for (const auto& w : n["warnings"]) std::cout << "warning: " << w.get<std::string>() << "\n";
}

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crisis tweet analytics: unmet needs and narratives"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string workspace = "workspace";
  std::string config_path;
  bool quiet = false;
  app.add_option("-w,--workspace", workspace, "Workspace directory")->capture_default_str();
  app.add_option("-c,--config", config_path, "Config file of key=value lines");
  app.add_flag("-q,--quiet", quiet, "Do not log stage progress");

  json overrides = json::object();

  auto* ingest = app.add_subcommand("ingest", "Load tweets, apply the time window and exclusion terms");
  flag<std::string>(ingest, overrides, "input", "JSON Lines tweet file");
  flag<std::string>(ingest, overrides, "from", "Window start (ISO-8601 or YYYY-MM-DD)");
  flag<std::string>(ingest, overrides, "to", "Window end, inclusive (a bare date covers the whole day)");
  flag<std::vector<std::string>>(ingest, overrides, "exclude", "Drop tweets containing these terms");

  auto* preprocess = app.add_subcommand("preprocess", "Clean and tokenize");

  auto* annotate = app.add_subcommand("annotate", "Sentiment, point of view and topic labels");
  flag<double>(annotate, overrides, "alpha", "Topic score threshold");
  flag<std::string>(annotate, overrides, "backend", "keyword, keyword:<lexicon.json>, remote or remote:<url>");
  flag<std::size_t>(annotate, overrides, "batch-size", "Sequences per backend request");
  flag<std::size_t>(annotate, overrides, "max-in-flight", "Concurrent backend requests");

  auto* embed = app.add_subcommand("embed", "Train document vectors and pool them per user");
  flag<int>(embed, overrides, "dim", "Vector size");
  flag<int>(embed, overrides, "epochs", "Training epochs");
  flag<std::uint64_t>(embed, overrides, "seed", "Random seed");
  flag<int>(embed, overrides, "min-word-freq", "Minimum corpus frequency of every word in a document");
  flag<int>(embed, overrides, "workers", "Training threads (1 is bit-reproducible)");

  auto* project = app.add_subcommand("project", "2-D t-SNE layout of user vectors");
  flag<double>(project, overrides, "perplexity", "t-SNE perplexity");
  flag<int>(project, overrides, "iterations", "t-SNE iterations");

  auto* graph = app.add_subcommand("graph", "Interaction graph, clusters and influencers");
  flag<std::size_t>(graph, overrides, "k", "Discourse clusters");
  flag<std::size_t>(graph, overrides, "top-k", "Influencers listed per cluster");

  auto* needs = app.add_subcommand("needs", "Labels with negative first-person sentiment, summarized");
  flag<std::size_t>(needs, overrides, "k-summary", "Representatives per label");
  flag<double>(needs, overrides, "tau", "Cosine similarity threshold");

  auto* narratives = app.add_subcommand("narratives", "Run every stage up to influencer ranking");

  auto* report = app.add_subcommand("report", "Render report.md or report.json");
  flag<std::string>(report, overrides, "format", "markdown or json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Workspace ws(workspace);
    WorkspaceLock lock(ws);
    json settings = ws.load_settings();
    if (!config_path.empty()) settings.update(read_config_file(config_path));
    settings.update(overrides);
    const PipelineConfig cfg = config_from_json(settings);

    Pipeline p(ws, cfg, nullptr, quiet ? nullptr : &std::cerr);
    if (ingest->parsed()) {
      p.ingest();
    } else if (preprocess->parsed()) {
      p.preprocess();
    } else if (annotate->parsed()) {
      p.annotate();
    } else if (embed->parsed()) {
      p.embed();
    } else if (project->parsed()) {
      p.project();
    } else if (graph->parsed() || narratives->parsed()) {
      p.graph();
      print_narratives(read_json(ws.file(artifacts::kNarratives)));
    } else if (needs->parsed()) {
      p.needs();
      print_needs(read_json(ws.file(artifacts::kNeeds)));
    } else if (report->parsed()) {
      std::cout << p.report(report_format_from_string(cfg.format)).string() << "\n";
    }
    ws.save_settings(config_to_json(cfg));
    return 0;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
