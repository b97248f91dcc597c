#pragma once

// Episode orchestration of the guiding loop, batch experiments, summary
// statistics, Welch's ANOVA and output writers (CSV, JSONL traces, SVG).

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qsrnav/core.hpp"
#include "qsrnav/qpf.hpp"
#include "qsrnav/scenario.hpp"

namespace qsrnav {

enum class FailureReason { Timeout, ModelFail, Degenerate };

std::string toString(FailureReason r);

struct EpisodeResult {
  int episode = 0;
  std::uint64_t seed = 0;
  bool success = false;
  std::optional<FailureReason> failure;
  int instructions = 0;           // submitted motion commands; Stop excluded
  double procTimeMs = 0.0;        // mean coordinator inference time per instruction
  double pathSize = 0.0;          // cm travelled by the guided agent
  double simTime = 0.0;           // s
  double wallTime = 0.0;          // s of host time
  int reinitialisations = 0;
  int skippedUpdates = 0;         // PFQC updates lost to triangulation failures
  double startGoalDistance = 0.0; // cm
};

struct TraceRecord {
  double time = 0.0;
  std::vector<Pose> observers;
  Pose guided;
  Point goal;
  Command command = Command::Stop;
  bool update = false;  // coordinator update (or initial mapping) record
  std::optional<std::vector<Pose>> particles;
  std::optional<RegionSignature> signature;
  std::optional<Point> estimate;
};

using TraceSink = std::function<void(const TraceRecord&)>;

enum class TraceMode { PerTick, PerUpdate };

struct EpisodeOptions {
  TraceSink sink;
  TraceMode mode = TraceMode::PerTick;
  bool includeParticles = true;
};

/// Uniform positions in the inset square, headings from Theta_m, the guided
/// agent outside the goal radius and every pair at least 10 cm apart.
InitialLayout sampleLayout(const ScenarioConfig& cfg, Rng& rng);

/// Observe, map once, release particles, then choose-predict-move-update
/// until the goal is reached or the episode times out. Uses the scenario's
/// layout when it has one, otherwise samples a layout from `seed`.
EpisodeResult runEpisode(const ScenarioConfig& cfg, std::uint64_t seed,
                         const EpisodeOptions& options = {});

struct BatchOptions {
  int episodes = 100;
  std::uint64_t baseSeed = 1;
  int threads = 0;  // 0: hardware concurrency
};

/// Episode i runs with seed baseSeed + i; results come back in index order.
std::vector<EpisodeResult> runBatch(const ScenarioConfig& cfg, const BatchOptions& options);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  int count = 0;
};

MetricSummary summarize(const std::vector<double>& values);

/// Metrics are taken over successful episodes only.
struct BatchSummary {
  Method method = Method::QPF;
  int m = 16;
  double tau = 0.0;
  bool orientationKnown = true;
  int episodes = 0;
  int successes = 0;
  double successPct = 0.0;
  MetricSummary instructions;
  MetricSummary procTimeMs;
  MetricSummary pathSize;
};

BatchSummary summarizeBatch(const ScenarioConfig& cfg, const std::vector<EpisodeResult>& results);

struct WelchResult {
  double f = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double pValue = 1.0;
};

/// Welch's heteroscedastic one-way ANOVA. Needs at least two groups, each with
/// two or more samples and positive variance.
WelchResult welchAnova(const std::vector<std::vector<double>>& groups);

// Output writers. Processing time is wall-clock and therefore left empty
// unless `timing` is set, which keeps default outputs reproducible.
void writeResultsCsv(std::ostream& out, const ScenarioConfig& cfg,
                     const std::vector<EpisodeResult>& results, bool timing);
void writeSummaryCsv(std::ostream& out, const std::vector<BatchSummary>& summaries, bool timing);
std::string traceLine(const TraceRecord& r);
std::string renderSvg(const ScenarioConfig& cfg, const std::vector<TraceRecord>& records);

/// Minimal CSV reader for files written above: header row, comma separated,
/// no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int column(const std::string& name) const;  // -1 if absent
};

CsvTable readCsv(std::istream& in);

/// Groups `column` values of successful rows by the `by` column (all rows when
/// there is no success column), in order of first appearance.
std::vector<std::pair<std::string, std::vector<double>>> groupColumn(const CsvTable& t,
                                                                      const std::string& column,
                                                                      const std::string& by);

}  // namespace qsrnav
