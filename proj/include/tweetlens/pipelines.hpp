#pragma once
// Workspace with cached stage artifacts and the two end-to-end analyses:
// unmet needs (labels with negative first-person sentiment, summarized) and
// narratives (user layout, clusters and influencers).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tweetlens/annotate.hpp"
#include "tweetlens/corpus.hpp"
#include "tweetlens/embed.hpp"
#include "tweetlens/network.hpp"
#include "tweetlens/project.hpp"
#include "tweetlens/summarize.hpp"

namespace tweetlens {

struct PipelineConfig {
  // ingest
  std::string input;
  std::optional<std::string> from;
  std::optional<std::string> to;
  std::vector<std::string> exclude;
  // annotate
  double alpha = kDefaultAlpha;
  std::string backend = "keyword";
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
  // embed / project / graph share one seed
  std::uint64_t seed = 1;
  int dim = 200;
  int epochs = 50;
  int min_word_freq = 3;
  int workers = 1;
  double perplexity = 30.0;
  int iterations = 1000;
  std::size_t k = 8;
  std::size_t top_k = 10;
  // needs
  std::size_t k_summary = 50;
  double tau = 0.6;
  // report
  std::string format = "markdown";

  EmbeddingConfig embedding() const;
  TsneConfig tsne() const;
  SummaryConfig summary() const;
};

nlohmann::json config_to_json(const PipelineConfig& cfg);
// Keys absent from `j` keep their value from `base`.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});

// ------------------------------------------------------------- workspace

struct StageSpec {
  std::string name;
  std::vector<std::string> inputs;   // workspace-relative artifact paths
  std::vector<std::string> outputs;  // workspace-relative artifact paths
  nlohmann::json config;             // everything else the stage depends on
};

struct StageOutcome {
  std::string stage;
  bool cached = false;
};

class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path file(const std::string& rel) const { return root_ / rel; }
  bool has(const std::string& rel) const;

  // True when the stage ran before with the same config hash, its inputs
  // still hash the same, and its outputs are present and unmodified.
  bool up_to_date(const StageSpec& spec) const;
  void record(const StageSpec& spec);
  const nlohmann::json& manifest() const noexcept { return manifest_; }

  nlohmann::json load_settings() const;
  void save_settings(const nlohmann::json& settings) const;

  // Runs `body` unless the stage is up to date.
  StageOutcome run(const StageSpec& spec, const std::function<void()>& body);

 private:
  void save_manifest() const;

  std::filesystem::path root_;
  nlohmann::json manifest_;
};

// Exclusive writer lock on a workspace, released on destruction. A lock left
// by a process that no longer exists is taken over.
class WorkspaceLock {
 public:
  explicit WorkspaceLock(const Workspace& ws);
  ~WorkspaceLock();
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  std::filesystem::path path_;
};

// ------------------------------------------------------------ analyses

struct LabelMedian {
  std::string label;
  std::size_t qualifying = 0;
  double median = 0;
};

struct UnmetNeedsReport {
  double alpha = kDefaultAlpha;
  SummaryConfig summary;
  std::size_t first_person = 0;
  std::vector<LabelMedian> medians;         // labels with at least one qualifying tweet, label-set order
  std::vector<std::string> negative_labels;  // median < 0
  std::vector<Summary> summaries;            // aligned with negative_labels
};

// Even-sized lists use the mean of the two middle values.
double median(std::vector<double> values);

// Medians over every first-person annotation carrying the label.
std::vector<LabelMedian> label_medians(std::span<const Annotation> annotations, const LabelSet& labels);

UnmetNeedsReport compute_unmet_needs(std::span<const ProcessedTweet> tweets, std::span<const Annotation> annotations,
                                     const EmbeddingModel& model, const LabelSet& labels, double alpha,
                                     const SummaryConfig& cfg);

struct NarrativeReport {
  std::size_t users = 0;
  std::size_t edges = 0;
  std::size_t dropped_interactions = 0;
  Clustering discourse;
  Clustering community;
  InfluencerReport discourse_influencers;
  InfluencerReport community_influencers;
  std::vector<std::string> warnings;
};

NarrativeReport compute_narratives(const UserGraph& g, const std::vector<UserVector>& users,
                                   const std::unordered_map<std::string, UserAnnotationSummary>& summaries,
                                   std::size_t k, std::size_t top_k, std::uint64_t seed);

nlohmann::json unmet_needs_to_json(const UnmetNeedsReport& r);
nlohmann::json narratives_to_json(const NarrativeReport& r);

// Rounds every floating-point value to `decimals` places.
nlohmann::json round_floats(const nlohmann::json& j, int decimals = 6);

enum class ReportFormat { Json, Markdown };
ReportFormat report_format_from_string(std::string_view s);

// Either section may be null. Serialization is deterministic.
std::string render_report(const nlohmann::json& needs, const nlohmann::json& narratives, ReportFormat format);
// Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

// -------------------------------------------------------------- pipeline

// Stage runner over one workspace. Every stage first brings its upstream
// stages up to date; unchanged stages are cache hits.
class Pipeline {
 public:
  Pipeline(Workspace& ws, PipelineConfig cfg, std::shared_ptr<ClassifierBackend> backend = nullptr,
           std::ostream* log = nullptr);

  void ingest();
  void preprocess();
  void annotate();
  void embed();
  void project();
  void graph();
  void needs();
  // Writes report.md or report.json from whichever analyses have run.
  std::filesystem::path report(ReportFormat format);

  const std::vector<StageOutcome>& outcomes() const noexcept { return outcomes_; }
  const PipelineConfig& config() const noexcept { return cfg_; }

 private:
  ClassifierBackend& backend();
  void note(const StageOutcome& o);

  Workspace& ws_;
  PipelineConfig cfg_;
  std::shared_ptr<ClassifierBackend> backend_;
  std::ostream* log_;
  std::vector<StageOutcome> outcomes_;
  std::map<std::string, bool> done_;
};

struct PipelineRun {
  nlohmann::json report;
  std::vector<StageOutcome> stages;
};

// Ingest must have happened (or cfg.input be set).
PipelineRun run_unmet_needs(Workspace& ws, const PipelineConfig& cfg,
                            std::shared_ptr<ClassifierBackend> backend = nullptr, std::ostream* log = nullptr);
PipelineRun run_narratives(Workspace& ws, const PipelineConfig& cfg,
                           std::shared_ptr<ClassifierBackend> backend = nullptr, std::ostream* log = nullptr);

namespace artifacts {
inline constexpr const char* kCorpus = "corpus.jsonl";
inline constexpr const char* kPreprocessed = "preprocessed.jsonl";
inline constexpr const char* kAnnotations = "annotations.jsonl";
inline constexpr const char* kModel = "model.bin";
inline constexpr const char* kDocVectors = "doc_vectors.csv";
inline constexpr const char* kUserVectors = "user_vectors.csv";
inline constexpr const char* kLayout = "layout.csv";
inline constexpr const char* kKlTrace = "kl_trace.csv";
inline constexpr const char* kProjectInfo = "project.json";
inline constexpr const char* kEdges = "edges.csv";
inline constexpr const char* kNodes = "nodes.csv";
inline constexpr const char* kNarratives = "narratives.json";
inline constexpr const char* kNeeds = "needs.json";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kSettings = "settings.json";
inline constexpr const char* kLock = ".lock";
}  // namespace artifacts

}  // namespace tweetlens
