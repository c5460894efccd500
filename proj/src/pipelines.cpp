#include "tweetlens/pipelines.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tweetlens/errors.hpp"
#include "tweetlens/hash.hpp"

namespace tweetlens {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- config

EmbeddingConfig PipelineConfig::embedding() const {
  EmbeddingConfig e;
  e.dim = dim;
  e.epochs = epochs;
  e.min_word_freq = min_word_freq;
  e.seed = seed;
  e.workers = workers;
  return e;
}

TsneConfig PipelineConfig::tsne() const {
  TsneConfig t;
  t.perplexity = perplexity;
  t.iterations = iterations;
  t.seed = seed;
  return t;
}

SummaryConfig PipelineConfig::summary() const { return {k_summary, tau}; }

json config_to_json(const PipelineConfig& c) {
  json j = {{"input", c.input},
            {"exclude", c.exclude},
            {"alpha", c.alpha},
            {"backend", c.backend},
            {"batch_size", c.batch_size},
            {"max_in_flight", c.max_in_flight},
            {"seed", c.seed},
            {"dim", c.dim},
            {"epochs", c.epochs},
            {"min_word_freq", c.min_word_freq},
            {"workers", c.workers},
            {"perplexity", c.perplexity},
            {"iterations", c.iterations},
            {"k", c.k},
            {"top_k", c.top_k},
            {"k_summary", c.k_summary},
            {"tau", c.tau},
            {"format", c.format}};
  j["from"] = c.from ? json(*c.from) : json(nullptr);
  j["to"] = c.to ? json(*c.to) : json(nullptr);
  return j;
}

PipelineConfig config_from_json(const json& j, PipelineConfig c) {
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key) && !j[key].is_null()) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  try {
    take("input", c.input);
    take("exclude", c.exclude);
    take("alpha", c.alpha);
    take("backend", c.backend);
    take("batch_size", c.batch_size);
    take("max_in_flight", c.max_in_flight);
    take("seed", c.seed);
    take("dim", c.dim);
    take("epochs", c.epochs);
    take("min_word_freq", c.min_word_freq);
    take("workers", c.workers);
    take("perplexity", c.perplexity);
    take("iterations", c.iterations);
    take("k", c.k);
    take("top_k", c.top_k);
    take("k_summary", c.k_summary);
    take("tau", c.tau);
    take("format", c.format);
    if (j.contains("from")) c.from = j["from"].is_null() ? std::nullopt : std::optional(j["from"].get<std::string>());
    if (j.contains("to")) c.to = j["to"].is_null() ? std::nullopt : std::optional(j["to"].get<std::string>());
  } catch (const json::exception& e) {
    throw InputError(std::string("bad pipeline setting: ") + e.what());
  }
  return c;
}

// ------------------------------------------------------------- workspace

namespace {

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

std::string now_iso() {
  return format_timestamp(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

std::string json_text(const json& j) { return round_floats(j).dump(2) + "\n"; }

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  return in;
}

}  // namespace

Workspace::Workspace(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw IoError("cannot create workspace " + root_.string() + ": " + ec.message());
  if (fs::exists(file(artifacts::kManifest))) {
    manifest_ = read_json_file(file(artifacts::kManifest));
  }
  if (!manifest_.is_object()) manifest_ = json::object();
  if (!manifest_.contains("stages")) manifest_["stages"] = json::object();
}

bool Workspace::has(const std::string& rel) const { return fs::exists(file(rel)); }

bool Workspace::up_to_date(const StageSpec& spec) const {
  const auto& stages = manifest_["stages"];
  if (!stages.contains(spec.name)) return false;
  const auto& entry = stages[spec.name];
  if (entry.value("config_hash", "") != sha256_hex(spec.config.dump())) return false;
  for (const auto* group : {&spec.inputs, &spec.outputs}) {
    const char* key = group == &spec.inputs ? "inputs" : "outputs";
    if (!entry.contains(key)) return false;
    for (const auto& rel : *group) {
      if (!entry[key].contains(rel) || !has(rel)) return false;
      if (entry[key][rel] != sha256_file(file(rel))) return false;
    }
    if (entry[key].size() != group->size()) return false;
  }
  return true;
}

void Workspace::record(const StageSpec& spec) {
  json entry = {{"config_hash", sha256_hex(spec.config.dump())}, {"config", spec.config}, {"completed_at", now_iso()}};
  entry["inputs"] = json::object();
  entry["outputs"] = json::object();
  for (const auto& rel : spec.inputs) entry["inputs"][rel] = sha256_file(file(rel));
  for (const auto& rel : spec.outputs) {
    if (!has(rel)) throw IoError("stage " + spec.name + " did not produce " + rel);
    entry["outputs"][rel] = sha256_file(file(rel));
  }
  manifest_["stages"][spec.name] = entry;
  save_manifest();
}

void Workspace::save_manifest() const { write_text_file(file(artifacts::kManifest), manifest_.dump(2) + "\n"); }

json Workspace::load_settings() const {
  return has(artifacts::kSettings) ? read_json_file(file(artifacts::kSettings)) : json::object();
}

void Workspace::save_settings(const json& settings) const {
  write_text_file(file(artifacts::kSettings), settings.dump(2) + "\n");
}

StageOutcome Workspace::run(const StageSpec& spec, const std::function<void()>& body) {
  if (up_to_date(spec)) return {spec.name, true};
  body();
  record(spec);
  return {spec.name, false};
}

WorkspaceLock::WorkspaceLock(const Workspace& ws) : path_(ws.file(artifacts::kLock)) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      const std::string pid = std::to_string(::getpid()) + "\n";
      [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
      ::close(fd);
      return;
    }
    if (errno != EEXIST) throw IoError("cannot create lock file " + path_.string());
    long owner = 0;
    std::ifstream(path_) >> owner;
    const bool stale = owner > 0 && owner != ::getpid() && ::kill(static_cast<pid_t>(owner), 0) == -1 && errno == ESRCH;
    if (!stale) break;
    std::error_code ec;
    fs::remove(path_, ec);
  }
  throw WorkspaceLocked(path_.string());
}

WorkspaceLock::~WorkspaceLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

// ------------------------------------------------------------- analyses

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::vector<LabelMedian> label_medians(std::span<const Annotation> annotations, const LabelSet& labels) {
  std::map<std::string, std::vector<double>> by_label;
  for (const auto& a : annotations) {
    if (a.pov != PovClass::First) continue;
    for (const auto& l : a.topics.assigned) by_label[l].push_back(a.sentiment.compound);
  }
  std::vector<LabelMedian> out;
  for (const auto& l : labels) {
    const auto it = by_label.find(l);
    if (it == by_label.end()) continue;
    out.push_back({l, it->second.size(), median(it->second)});
  }
  return out;
}

UnmetNeedsReport compute_unmet_needs(std::span<const ProcessedTweet> tweets, std::span<const Annotation> annotations,
                                     const EmbeddingModel& model, const LabelSet& labels, double alpha,
                                     const SummaryConfig& cfg) {
  validate(cfg);
  UnmetNeedsReport r;
  r.alpha = alpha;
  r.summary = cfg;
  r.first_person = static_cast<std::size_t>(
      std::count_if(annotations.begin(), annotations.end(), [](const Annotation& a) { return a.pov == PovClass::First; }));
  r.medians = label_medians(annotations, labels);
  for (const auto& m : r.medians) {
    if (m.median < 0) r.negative_labels.push_back(m.label);
  }
  for (const auto& label : r.negative_labels) r.summaries.push_back(summarize_label(label, tweets, annotations, model, cfg));
  return r;
}

NarrativeReport compute_narratives(const UserGraph& g, const std::vector<UserVector>& users,
                                   const std::unordered_map<std::string, UserAnnotationSummary>& summaries,
                                   std::size_t k, std::size_t top_k, std::uint64_t seed) {
  if (g.nodes.size() < 4) throw TooFewUsers(g.nodes.size());
  NarrativeReport r;
  r.users = g.nodes.size();
  r.edges = g.edges.size();
  r.dropped_interactions = g.dropped_interactions;
  // Cluster the graph's users in graph order.
  std::unordered_map<std::string, const UserVector*> by_id;
  for (const auto& u : users) by_id.emplace(u.user_id, &u);
  std::vector<UserVector> ordered;
  for (const auto& n : g.nodes) ordered.push_back(*by_id.at(n.user_id));
  r.discourse = cluster_discourse(ordered, k, seed);
  r.community = cluster_community(g);
  r.discourse_influencers = rank_influencers(g, r.discourse, summaries, top_k);
  r.community_influencers = rank_influencers(g, r.community, summaries, top_k);
  const auto guarded = std::count_if(g.edges.begin(), g.edges.end(), [](const GraphEdge& e) { return e.epsilon_guarded; });
  if (guarded > 0) r.warnings.push_back(std::to_string(guarded) + " edges join users with identical vectors");
  if (g.dropped_interactions > 0) {
    r.warnings.push_back(std::to_string(g.dropped_interactions) + " interactions involve users without vectors");
  }
  return r;
}

json unmet_needs_to_json(const UnmetNeedsReport& r) {
  json medians = json::array();
  for (const auto& m : r.medians) {
    medians.push_back({{"label", m.label}, {"first_person_tweets", m.qualifying}, {"median_compound", m.median}});
  }
  json summaries = json::array();
  for (const auto& s : r.summaries) summaries.push_back(summary_to_json(s));
  return {{"alpha", r.alpha},
          {"k", r.summary.k},
          {"tau", r.summary.tau},
          {"first_person_tweets", r.first_person},
          {"labels", medians},
          {"negative_labels", r.negative_labels},
          {"summaries", summaries}};
}

json narratives_to_json(const NarrativeReport& r) {
  return {{"users", r.users},
          {"edges", r.edges},
          {"dropped_interactions", r.dropped_interactions},
          {"discourse",
           {{"k", r.discourse.cluster_count()},
            {"silhouette", r.discourse.quality},
            {"inertia", r.discourse.inertia},
            {"influencers", influencers_to_json(r.discourse_influencers)}}},
          {"community",
           {{"communities", r.community.cluster_count()},
            {"modularity", r.community.quality},
            {"influencers", influencers_to_json(r.community_influencers)}}},
          {"warnings", r.warnings}};
}

json round_floats(const json& j, int decimals) {
  const double scale = std::pow(10.0, decimals);
  switch (j.type()) {
    case json::value_t::object: {
      json out = json::object();
      for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = round_floats(it.value(), decimals);
      return out;
    }
    case json::value_t::array: {
      json out = json::array();
      for (const auto& v : j) out.push_back(round_floats(v, decimals));
      return out;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) return nullptr;
      const double r = std::round(x * scale) / scale;
      return r == 0.0 ? 0.0 : r;
    }
    default:
      return j;
  }
}

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  throw InputError("unknown report format \"" + std::string(s) + "\" (use json or markdown)");
}

namespace {

std::string cell(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n' || c == '\r') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out.empty() ? " " : out;
}

std::string cell(const json& v) { return cell(v.is_string() ? v.get<std::string>() : std::string()); }

std::string num(const json& v) {
  if (v.is_null()) return "n/a";
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(6);
  ss << v.get<double>();
  return ss.str();
}

std::string top_labels(const json& labels, std::size_t n) {
  std::vector<std::pair<std::size_t, std::string>> v;
  for (auto it = labels.begin(); it != labels.end(); ++it) v.emplace_back(it.value().get<std::size_t>(), it.key());
  std::stable_sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.first > b.first; });
  std::string out;
  for (std::size_t i = 0; i < v.size() && i < n; ++i) {
    if (!out.empty()) out += ", ";
    out += v[i].second + " (" + std::to_string(v[i].first) + ")";
  }
  return out.empty() ? "none" : out;
}

void render_clusters(std::ostringstream& md, const json& influencers) {
  md << "| Cluster | Users | Mean sentiment | Top labels | Top influencers |\n";
  md << "|---|---|---|---|---|\n";
  for (const auto& c : influencers["clusters"]) {
    std::string names;
    for (const auto& e : c["influencers"]) {
      if (names.size() > 0) names += ", ";
      names += e["user_id"].get<std::string>();
      if (names.size() > 60) break;
    }
    md << "| " << c["cluster"].get<int>() << " | " << c["size"].get<std::size_t>() << " | " << num(c["mean_sentiment"])
       << " | " << cell(top_labels(c["labels"], 3)) << " | " << cell(names) << " |\n";
  }
}

}  // namespace

std::string render_report(const json& needs, const json& narratives, ReportFormat format) {
  if (format == ReportFormat::Json) {
    json doc = json::object();
    doc["unmet_needs"] = needs.is_null() ? json(nullptr) : needs;
    doc["narratives"] = narratives.is_null() ? json(nullptr) : narratives;
    return json_text(doc);
  }
  std::ostringstream md;
  md << "# Crisis tweet report\n\n## Unmet needs\n\n";
  if (needs.is_null()) {
    md << "Not computed.\n\n";
  } else {
    md << "alpha = " << num(needs["alpha"]) << ", K = " << needs["k"].get<std::size_t>() << ", tau = " << num(needs["tau"])
       << ", first-person tweets = " << needs["first_person_tweets"].get<std::size_t>() << "\n\n";
    if (needs["labels"].empty()) {
      md << "No label has first-person tweets.\n\n";
    } else {
      md << "| Label | First-person tweets | Median compound |\n|---|---|---|\n";
      for (const auto& l : needs["labels"]) {
        md << "| " << cell(l["label"]) << " | " << l["first_person_tweets"].get<std::size_t>() << " | "
           << num(l["median_compound"]) << " |\n";
      }
      md << "\n";
    }
    if (needs["summaries"].empty()) md << "No label has a negative median sentiment.\n\n";
    for (const auto& s : needs["summaries"]) {
      md << "### " << s["label"].get<std::string>() << "\n\n| Full Text | Location |\n|---|---|\n";
      for (const auto& r : s["representatives"]) md << "| " << cell(r["text"]) << " | " << cell(r["location"]) << " |\n";
      md << "\n";
    }
  }
  md << "## Narratives\n\n";
  if (narratives.is_null()) {
    md << "Not computed.\n";
  } else {
    md << "users = " << narratives["users"].get<std::size_t>() << ", edges = " << narratives["edges"].get<std::size_t>()
       << ", dropped interactions = " << narratives["dropped_interactions"].get<std::size_t>() << "\n\n";
    const auto& d = narratives["discourse"];
    md << "### Discourse clusters (k = " << d["k"].get<int>() << ", silhouette = " << num(d["silhouette"]) << ")\n\n";
    render_clusters(md, d["influencers"]);
    const auto& c = narratives["community"];
    md << "\n### Communities (" << c["communities"].get<int>() << ", modularity = " << num(c["modularity"]) << ")\n\n";
    render_clusters(md, c["influencers"]);
    if (!narratives["warnings"].empty()) {
      md << "\nWarnings:\n\n";
      for (const auto& w : narratives["warnings"]) md << "- " << w.get<std::string>() << "\n";
    }
  }
  return md.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

// -------------------------------------------------------------- pipeline

namespace {

template <typename F>
void write_stream(const fs::path& path, F&& body) {
  std::ostringstream ss;
  body(ss);
  write_text_file(path, ss.str());
}

std::vector<ProcessedTweet> load_processed(const Workspace& ws) {
  auto in = open_in(ws.file(artifacts::kPreprocessed));
  return read_processed_jsonl(in);
}

std::vector<Annotation> load_annotations(const Workspace& ws) {
  auto in = open_in(ws.file(artifacts::kAnnotations));
  return read_annotations_jsonl(in);
}

std::vector<UserVector> load_users(const Workspace& ws) {
  auto in = open_in(ws.file(artifacts::kUserVectors));
  return read_user_vectors_csv(in);
}

}  // namespace

Pipeline::Pipeline(Workspace& ws, PipelineConfig cfg, std::shared_ptr<ClassifierBackend> backend, std::ostream* log)
    : ws_(ws), cfg_(std::move(cfg)), backend_(std::move(backend)), log_(log) {}

ClassifierBackend& Pipeline::backend() {
  if (!backend_) backend_ = make_backend(cfg_.backend);
  return *backend_;
}

void Pipeline::note(const StageOutcome& o) {
  outcomes_.push_back(o);
  done_[o.stage] = true;
  if (log_ != nullptr) *log_ << o.stage << ": " << (o.cached ? "cached" : "ran") << "\n";
}

void Pipeline::ingest() {
  if (done_.count("ingest")) return;
  if (cfg_.input.empty()) {
    if (!ws_.has(artifacts::kCorpus)) throw InputError("no corpus in the workspace; run ingest with --input first");
    note({"ingest", true});
    return;
  }
  if (!fs::exists(cfg_.input)) throw InputError("input file " + cfg_.input + " does not exist");
  StageSpec spec{"ingest", {}, {artifacts::kCorpus}, {}};
  spec.config = {{"input_sha256", sha256_file(cfg_.input)}, {"exclude", cfg_.exclude}};
  spec.config["from"] = cfg_.from ? json(*cfg_.from) : json(nullptr);
  spec.config["to"] = cfg_.to ? json(*cfg_.to) : json(nullptr);
  note(ws_.run(spec, [&] {
    Corpus corpus = load_jsonl(cfg_.input);
    if (cfg_.from || cfg_.to || !cfg_.exclude.empty()) {
      const Timestamp start = cfg_.from ? parse_timestamp(*cfg_.from) : Timestamp::min();
      const Timestamp end = cfg_.to ? parse_window_end(*cfg_.to) : Timestamp::max();
      corpus = filter_corpus(corpus, make_window(start, end), cfg_.exclude);
    }
    write_stream(ws_.file(artifacts::kCorpus), [&](std::ostream& out) { write_jsonl(out, corpus); });
  }));
}

void Pipeline::preprocess() {
  if (done_.count("preprocess")) return;
  ingest();
  const StageSpec spec{"preprocess", {artifacts::kCorpus}, {artifacts::kPreprocessed}, {{"translator", "identity"}}};
  note(ws_.run(spec, [&] {
    const Corpus corpus = load_jsonl(ws_.file(artifacts::kCorpus));
    IdentityTranslator translator;
    const auto processed = tweetlens::preprocess(corpus, translator);
    write_stream(ws_.file(artifacts::kPreprocessed), [&](std::ostream& out) { write_processed_jsonl(out, processed); });
  }));
}

void Pipeline::annotate() {
  if (done_.count("annotate")) return;
  preprocess();
  json backend_key = cfg_.backend;
  if (cfg_.backend.rfind("keyword:", 0) == 0) {
    const std::string path = cfg_.backend.substr(8);
    if (!fs::exists(path)) throw InputError("keyword lexicon " + path + " does not exist");
    backend_key = json{{"spec", "keyword"}, {"lexicon_sha256", sha256_file(path)}};
  } else if (cfg_.backend.rfind("remote", 0) == 0) {
    const char* env = std::getenv("TWEETLENS_NLI_URL");
    backend_key = json{{"spec", cfg_.backend}, {"env_url", env ? env : ""}};
  }
  const StageSpec spec{"annotate",
                       {artifacts::kPreprocessed},
                       {artifacts::kAnnotations},
                       {{"alpha", cfg_.alpha}, {"backend", backend_key}, {"labels", default_labels()}}};
  note(ws_.run(spec, [&] {
    const auto processed = load_processed(ws_);
    AnnotateOptions opt;
    opt.alpha = cfg_.alpha;
    opt.assign.batch_size = cfg_.batch_size;
    opt.assign.max_in_flight = cfg_.max_in_flight;
    const auto ann = annotate_corpus(processed, backend(), opt);
    write_stream(ws_.file(artifacts::kAnnotations), [&](std::ostream& out) { write_annotations_jsonl(out, ann); });
  }));
}

void Pipeline::embed() {
  if (done_.count("embed")) return;
  preprocess();
  const auto e = cfg_.embedding();
  validate(e);
  const StageSpec spec{"embed",
                       {artifacts::kPreprocessed},
                       {artifacts::kModel, artifacts::kDocVectors, artifacts::kUserVectors},
                       {{"dim", e.dim},
                        {"epochs", e.epochs},
                        {"min_word_freq", e.min_word_freq},
                        {"window", e.window},
                        {"negative_samples", e.negative_samples},
                        {"initial_lr", e.initial_lr},
                        {"final_lr", e.final_lr},
                        {"seed", e.seed},
                        {"workers", e.workers}}};
  note(ws_.run(spec, [&] {
    const auto processed = load_processed(ws_);
    const auto set = build_training_set(training_candidates(processed), e);
    if (log_ != nullptr) {
      *log_ << "embed: " << set.docs.size() << " documents (" << set.rejected_rare << " rejected for rare words, "
            << set.rejected_empty << " empty)\n";
    }
    const auto model = train(set, e);
    const fs::path tmp = ws_.file(std::string(artifacts::kModel) + ".tmp");
    save_model(model, tmp);
    fs::rename(tmp, ws_.file(artifacts::kModel));
    write_stream(ws_.file(artifacts::kDocVectors), [&](std::ostream& out) { write_doc_vectors_csv(out, model); });
    const auto users = user_vectors(model, processed);
    write_stream(ws_.file(artifacts::kUserVectors), [&](std::ostream& out) { write_user_vectors_csv(out, users); });
  }));
}

void Pipeline::project() {
  if (done_.count("project")) return;
  embed();
  const auto t = cfg_.tsne();
  const StageSpec spec{"project",
                       {artifacts::kUserVectors},
                       {artifacts::kLayout, artifacts::kKlTrace, artifacts::kProjectInfo},
                       {{"perplexity", t.perplexity}, {"iterations", t.iterations}, {"seed", t.seed}}};
  note(ws_.run(spec, [&] {
    const auto users = load_users(ws_);
    if (users.size() < 4) throw TooFewUsers(users.size());
    TsneConfig tc = t;
    std::vector<std::string> warnings;
    const double limit = static_cast<double>(users.size() - 1) / 3.0;
    if (tc.perplexity >= limit) {
      tc.perplexity = limit * 0.99;
      warnings.push_back("perplexity lowered to " + std::to_string(tc.perplexity) + " for " +
                         std::to_string(users.size()) + " users");
    }
    auto layout = project_users(users, tc);
    warnings.insert(warnings.end(), layout.warnings.begin(), layout.warnings.end());
    write_stream(ws_.file(artifacts::kLayout), [&](std::ostream& out) { write_layout_csv(out, layout); });
    write_stream(ws_.file(artifacts::kKlTrace), [&](std::ostream& out) { write_kl_trace_csv(out, layout.kl_trace); });
    const json info = {{"perplexity", tc.perplexity},
                       {"iterations", tc.iterations},
                       {"final_kl", layout.kl_trace.empty() ? 0.0 : layout.kl_trace.back()},
                       {"warnings", warnings}};
    write_text_file(ws_.file(artifacts::kProjectInfo), json_text(info));
  }));
}

void Pipeline::graph() {
  if (done_.count("graph")) return;
  annotate();
  project();
  const StageSpec spec{
      "graph",
      {artifacts::kCorpus, artifacts::kAnnotations, artifacts::kUserVectors, artifacts::kLayout, artifacts::kProjectInfo},
      {artifacts::kEdges, artifacts::kNodes, artifacts::kNarratives},
      {{"k", cfg_.k}, {"top_k", cfg_.top_k}, {"seed", cfg_.seed}}};
  note(ws_.run(spec, [&] {
    const Corpus corpus = load_jsonl(ws_.file(artifacts::kCorpus));
    const auto ann = load_annotations(ws_);
    const auto users = load_users(ws_);
    auto layout_in = open_in(ws_.file(artifacts::kLayout));
    const auto layout = read_layout_csv(layout_in);
    const auto g = build_user_graph(corpus.tweets, users, layout);
    const auto summaries = summarize_user_annotations(corpus.tweets, ann);
    auto report = compute_narratives(g, users, summaries, cfg_.k, cfg_.top_k, cfg_.seed);
    const json info = read_json_file(ws_.file(artifacts::kProjectInfo));
    std::vector<std::string> warnings = info.value("warnings", std::vector<std::string>{});
    warnings.insert(warnings.end(), report.warnings.begin(), report.warnings.end());
    report.warnings = warnings;
    write_stream(ws_.file(artifacts::kEdges), [&](std::ostream& out) { write_edges_csv(out, g); });
    write_stream(ws_.file(artifacts::kNodes),
                 [&](std::ostream& out) { write_nodes_csv(out, g, report.discourse, report.community, summaries); });
    write_text_file(ws_.file(artifacts::kNarratives), json_text(narratives_to_json(report)));
  }));
}

void Pipeline::needs() {
  if (done_.count("needs")) return;
  annotate();
  embed();
  const auto sc = cfg_.summary();
  validate(sc);
  const StageSpec spec{"needs",
                       {artifacts::kPreprocessed, artifacts::kAnnotations, artifacts::kModel},
                       {artifacts::kNeeds},
                       {{"k_summary", sc.k}, {"tau", sc.tau}, {"alpha", cfg_.alpha}}};
  note(ws_.run(spec, [&] {
    const auto processed = load_processed(ws_);
    const auto ann = load_annotations(ws_);
    const auto model = load_model(ws_.file(artifacts::kModel));
    const auto report = compute_unmet_needs(processed, ann, model, default_labels(), cfg_.alpha, sc);
    write_text_file(ws_.file(artifacts::kNeeds), json_text(unmet_needs_to_json(report)));
  }));
}

fs::path Pipeline::report(ReportFormat format) {
  const std::string out = format == ReportFormat::Json ? "report.json" : "report.md";
  StageSpec spec{"report:" + out, {}, {out}, {{"format", out}}};
  for (const char* a : {artifacts::kNeeds, artifacts::kNarratives}) {
    if (ws_.has(a)) spec.inputs.push_back(a);
  }
  if (spec.inputs.empty()) throw InputError("nothing to report yet; run needs or narratives first");
  note(ws_.run(spec, [&] {
    const json needs = ws_.has(artifacts::kNeeds) ? read_json_file(ws_.file(artifacts::kNeeds)) : json(nullptr);
    const json narr = ws_.has(artifacts::kNarratives) ? read_json_file(ws_.file(artifacts::kNarratives)) : json(nullptr);
    write_text_file(ws_.file(out), render_report(needs, narr, format));
  }));
  return ws_.file(out);
}

PipelineRun run_unmet_needs(Workspace& ws, const PipelineConfig& cfg, std::shared_ptr<ClassifierBackend> backend,
                            std::ostream* log) {
  WorkspaceLock lock(ws);
  Pipeline p(ws, cfg, std::move(backend), log);
  p.needs();
  return {read_json_file(ws.file(artifacts::kNeeds)), p.outcomes()};
}

PipelineRun run_narratives(Workspace& ws, const PipelineConfig& cfg, std::shared_ptr<ClassifierBackend> backend,
                           std::ostream* log) {
  WorkspaceLock lock(ws);
  Pipeline p(ws, cfg, std::move(backend), log);
  p.graph();
  return {read_json_file(ws.file(artifacts::kNarratives)), p.outcomes()};
}

}  // namespace tweetlens
