// qsrnav command line: single episodes, batch experiments, Welch analysis of
// result files and StarVars model checking.
//
// Exit codes: 0 success, 1 configuration error, 2 episode or LP failure,
// 3 I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsrnav/harness.hpp"
#include "qsrnav/scenario.hpp"
#include "qsrnav/starvars.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitEpisode = 2;
constexpr int kExitIo = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream openOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

qsrnav::ScenarioConfig loadConfig(const std::string& path) {
  return qsrnav::parseScenario(readFile(path));
}

int cmdRun(const std::string& scenario, std::optional<std::uint64_t> seed,
           const std::string& tracePath, const std::string& svgPath, bool perUpdate) {
  auto cfg = loadConfig(scenario);
  const std::uint64_t s = seed.value_or(cfg.seed);

  std::ofstream trace;
  if (!tracePath.empty()) trace = openOut(tracePath);
  std::vector<qsrnav::TraceRecord> records;

  qsrnav::EpisodeOptions opt;
  opt.mode = perUpdate ? qsrnav::TraceMode::PerUpdate : qsrnav::TraceMode::PerTick;
  if (!tracePath.empty() || !svgPath.empty()) {
    opt.sink = [&](const qsrnav::TraceRecord& r) {
      if (trace.is_open()) trace << qsrnav::traceLine(r) << '\n';
      if (!svgPath.empty()) records.push_back(r);
    };
  }
  const auto res = qsrnav::runEpisode(cfg, s, opt);
  if (trace.is_open() && !trace) throw IoError("failed writing " + tracePath);
  if (!svgPath.empty()) {
    auto svg = openOut(svgPath);
    svg << qsrnav::renderSvg(cfg, records);
    if (!svg) throw IoError("failed writing " + svgPath);
  }

  std::printf("method=%s m=%d seed=%llu success=%d instructions=%d path=%.3f sim_time=%.1f",
              qsrnav::toString(cfg.method).c_str(), cfg.m, static_cast<unsigned long long>(s),
              res.success ? 1 : 0, res.instructions, res.pathSize, res.simTime);
  if (res.failure) std::printf(" failure=%s", qsrnav::toString(*res.failure).c_str());
  std::printf("\n");
  return res.success ? kExitOk : kExitEpisode;
}

int cmdBatch(const std::string& scenario, int episodes, std::optional<std::uint64_t> seed,
             const std::string& outPath, const std::string& summaryPath, int threads,
             bool timing) {
  auto cfg = loadConfig(scenario);
  qsrnav::BatchOptions opt;
  opt.episodes = episodes;
  opt.baseSeed = seed.value_or(cfg.seed);
  opt.threads = threads;
  const auto results = qsrnav::runBatch(cfg, opt);
  const auto summary = qsrnav::summarizeBatch(cfg, results);

  if (!outPath.empty()) {
    auto out = openOut(outPath);
    qsrnav::writeResultsCsv(out, cfg, results, timing);
    if (!out) throw IoError("failed writing " + outPath);
  }
  if (!summaryPath.empty()) {
    auto out = openOut(summaryPath);
    qsrnav::writeSummaryCsv(out, {summary}, timing);
    if (!out) throw IoError("failed writing " + summaryPath);
  }
  std::printf("method=%s m=%d orientation=%s episodes=%d success=%.1f%% path=%.1f(%.1f) instr=%.1f(%.1f)\n",
              qsrnav::toString(cfg.method).c_str(), cfg.m,
              cfg.orientationKnown ? "known" : "unknown", summary.episodes, summary.successPct,
              summary.pathSize.mean, summary.pathSize.stddev, summary.instructions.mean,
              summary.instructions.stddev);
  return kExitOk;
}

int cmdAnalyze(const std::string& path, const std::string& column, const std::string& by) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  const auto table = qsrnav::readCsv(in);
  const auto groups = qsrnav::groupColumn(table, column, by);
  std::printf("%-20s %6s %12s %12s\n", by.c_str(), "n", "mean", "std");
  std::vector<std::vector<double>> samples;
  for (const auto& [name, values] : groups) {
    const auto s = qsrnav::summarize(values);
    std::printf("%-20s %6d %12.4f %12.4f\n", name.c_str(), s.count, s.mean, s.stddev);
    samples.push_back(values);
  }
  const auto w = qsrnav::welchAnova(samples);
  std::printf("welch F=%.6f df1=%.4f df2=%.4f p=%.6g\n", w.f, w.df1, w.df2, w.pValue);
  return kExitOk;
}

int cmdCheckModel(const std::string& path) {
  namespace sv = qsrnav::starvars;
  const auto file = sv::parseRelationFile(readFile(path));
  const int n = static_cast<int>(file.names.size());
  sv::ModelSearch search;
  search.entityCount = n;
  search.m = file.m;
  search.oriented.assign(n, true);
  search.known.assign(n, std::nullopt);
  for (const auto& [name, deg] : file.thetaDeg) search.known[file.slot(name)] = qsrnav::Angle::fromDegrees(deg);
  search.centre = false;
  sv::SearchStats stats;
  const auto model = sv::searchValidModel(file.relations, search, &stats);
  if (!model) {
    std::printf("inconsistent: no model after %ld orientation assignments\n", stats.assignmentsTried);
    return kExitEpisode;
  }
  std::printf("consistent: model found after %ld orientation assignments\n", stats.assignmentsTried);
  for (int i = 0; i < n; ++i) {
    const auto& e = model->entities[i];
    std::printf("%s x=%.6g y=%.6g theta=%.6g\n", file.names[i].c_str(), e.x, e.y,
                e.theta ? e.theta->degrees() : 0.0);
  }
  for (const auto& r : file.relations) {
    std::printf("%s (%d) %s %s\n", file.names[r.source].c_str(), r.lower, file.names[r.target].c_str(),
                sv::checkRelation(*model, r) ? "holds" : "VIOLATED");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided navigation with StarVars qualitative reasoning and particle filters"};
  app.require_subcommand(1);

  std::string scenario, tracePath, svgPath, outPath, summaryPath, csvPath, column, by, relations;
  std::optional<std::uint64_t> seed;
  int episodes = 100, threads = 0;
  bool timing = false, perUpdate = false;

  auto* run = app.add_subcommand("run", "Run one episode");
  run->add_option("scenario", scenario, "Scenario file")->required();
  run->add_option("--seed", seed, "Episode seed (default: scenario seed)");
  run->add_option("--trace", tracePath, "Write a JSONL trace");
  run->add_option("--svg", svgPath, "Write an SVG trajectory plot");
  run->add_flag("--trace-updates", perUpdate, "Trace coordinator updates only, not every tick");

  auto* batch = app.add_subcommand("batch", "Run a batch of sampled episodes");
  batch->add_option("scenario", scenario, "Scenario file")->required();
  batch->add_option("--episodes", episodes, "Episode count")->check(CLI::PositiveNumber);
  batch->add_option("--seed", seed, "Base seed; episode i uses seed + i");
  batch->add_option("--out", outPath, "Per-episode results CSV");
  batch->add_option("--summary", summaryPath, "Summary CSV");
  batch->add_option("--threads", threads, "Worker threads (0: all cores)");
  batch->add_flag("--timing", timing, "Record wall-clock processing times (not reproducible)");

  auto* analyze = app.add_subcommand("analyze", "Welch ANOVA over a results CSV");
  analyze->add_option("results", csvPath, "Results CSV")->required();
  analyze->add_option("--welch", column, "Metric column")->default_val("path_size");
  analyze->add_option("--by", by, "Grouping column")->default_val("method");

  auto* check = app.add_subcommand("check-model", "Find a model for a StarVars relation file");
  check->add_option("relations", relations, "Relation file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmdRun(scenario, seed, tracePath, svgPath, perUpdate);
    if (*batch) return cmdBatch(scenario, episodes, seed, outPath, summaryPath, threads, timing);
    if (*analyze) return cmdAnalyze(csvPath, column, by);
    if (*check) return cmdCheckModel(relations);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const qsrnav::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const qsrnav::starvars::NumericalFailure& e) {
    std::cerr << "LP failure: " << e.what() << '\n';
    return kExitEpisode;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitEpisode;
  }
  return kExitConfig;
}
