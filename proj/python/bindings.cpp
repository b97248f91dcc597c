// Python bindings: scenario handling, episodes and batches, Welch's ANOVA and
// the StarVars model checker. Results come back as plain dicts and lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qsrnav/harness.hpp"
#include "qsrnav/qpf.hpp"
#include "qsrnav/scenario.hpp"
#include "qsrnav/starvars.hpp"

namespace py = pybind11;
using namespace qsrnav;

namespace {

py::dict resultDict(const EpisodeResult& r) {
  py::dict d;
  d["episode"] = r.episode;
  d["seed"] = r.seed;
  d["success"] = r.success;
  d["failure"] = r.failure ? py::cast(toString(*r.failure)) : py::none();
  d["instructions"] = r.instructions;
  d["proc_time_ms"] = r.procTimeMs;
  d["path_size"] = r.pathSize;
  d["sim_time"] = r.simTime;
  d["reinitialisations"] = r.reinitialisations;
  d["skipped_updates"] = r.skippedUpdates;
  d["start_goal_distance"] = r.startGoalDistance;
  return d;
}

py::dict metricDict(const MetricSummary& m) {
  py::dict d;
  d["mean"] = m.mean;
  d["std"] = m.stddev;
  d["count"] = m.count;
  return d;
}

py::dict runEpisodePy(const std::string& scenario, std::optional<std::uint64_t> seed, bool trace) {
  const auto cfg = parseScenario(scenario);
  std::vector<std::string> lines;
  EpisodeOptions opt;
  if (trace) {
    opt.mode = TraceMode::PerUpdate;
    opt.sink = [&](const TraceRecord& r) { lines.push_back(traceLine(r)); };
  }
  EpisodeResult res;
  {
    py::gil_scoped_release release;
    res = runEpisode(cfg, seed.value_or(cfg.seed), opt);
  }
  auto d = resultDict(res);
  if (trace) d["trace"] = lines;
  return d;
}

py::dict runBatchPy(const std::string& scenario, int episodes, std::optional<std::uint64_t> seed,
                    int threads) {
  const auto cfg = parseScenario(scenario);
  BatchOptions opt;
  opt.episodes = episodes;
  opt.baseSeed = seed.value_or(cfg.seed);
  opt.threads = threads;
  std::vector<EpisodeResult> results;
  {
    py::gil_scoped_release release;
    results = runBatch(cfg, opt);
  }
  const auto s = summarizeBatch(cfg, results);
  py::list rows;
  for (const auto& r : results) rows.append(resultDict(r));
  py::dict summary;
  summary["method"] = toString(s.method);
  summary["m"] = s.m;
  summary["orientation_known"] = s.orientationKnown;
  summary["episodes"] = s.episodes;
  summary["successes"] = s.successes;
  summary["success_pct"] = s.successPct;
  summary["instructions"] = metricDict(s.instructions);
  summary["proc_time_ms"] = metricDict(s.procTimeMs);
  summary["path_size"] = metricDict(s.pathSize);
  py::dict d;
  d["results"] = rows;
  d["summary"] = summary;
  return d;
}

py::dict welchPy(const std::vector<std::vector<double>>& groups) {
  const auto w = welchAnova(groups);
  py::dict d;
  d["f"] = w.f;
  d["df1"] = w.df1;
  d["df2"] = w.df2;
  d["p_value"] = w.pValue;
  return d;
}

py::object checkModelPy(const std::string& text) {
  namespace sv = starvars;
  const auto file = sv::parseRelationFile(text);
  const int n = static_cast<int>(file.names.size());
  sv::ModelSearch search;
  search.entityCount = n;
  search.m = file.m;
  search.oriented.assign(n, true);
  search.known.assign(n, std::nullopt);
  for (const auto& [name, deg] : file.thetaDeg) search.known[file.slot(name)] = Angle::fromDegrees(deg);
  search.centre = false;
  const auto model = sv::searchValidModel(file.relations, search);
  if (!model) return py::none();
  py::dict d;
  for (int i = 0; i < n; ++i) {
    const auto& e = model->entities[i];
    d[py::str(file.names[i])] =
        py::make_tuple(e.x, e.y, e.theta ? py::cast(e.theta->degrees()) : py::none());
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_qsrnav, m) {
  m.doc() = "Guided navigation with StarVars qualitative reasoning and particle filters";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("normalize_scenario", [](const std::string& s) { return serializeScenario(parseScenario(s)); },
        py::arg("scenario"), "Parse, validate and re-serialise a JSON scenario with every default filled in.");
  m.def("run_episode", &runEpisodePy, py::arg("scenario"), py::arg("seed") = py::none(),
        py::arg("trace") = false,
        "Run one episode of a JSON scenario; with trace=True the per-update JSONL records are included.");
  m.def("run_batch", &runBatchPy, py::arg("scenario"), py::arg("episodes") = 100,
        py::arg("seed") = py::none(), py::arg("threads") = 0,
        "Run episodes with seeds seed + i and return per-episode results and the summary.");
  m.def("welch_anova", &welchPy, py::arg("groups"), "Welch's heteroscedastic one-way ANOVA.");
  m.def("sector_of",
        [](double ox, double oy, double thetaDeg, double tx, double ty, int mm) {
          return starvars::sectorOf({ox, oy, Angle::fromDegrees(thetaDeg)}, {tx, ty}, mm).value;
        },
        py::arg("ox"), py::arg("oy"), py::arg("theta_deg"), py::arg("tx"), py::arg("ty"), py::arg("m"),
        "Sector of target (tx, ty) in the frame of an observer at (ox, oy) facing theta_deg.");
  m.def("check_model", &checkModelPy, py::arg("relations"),
        "Model of a relation text ('A (1) B' lines) as {name: (x, y, theta_deg)}, or None when inconsistent.");
}
