#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "oracles/welch_reference.hpp"
#include "qsrnav/harness.hpp"

using namespace qsrnav;

namespace {

ScenarioConfig fixedScenario(Method method) {
  ScenarioConfig cfg;
  cfg.method = method;
  cfg.m = 16;
  cfg.noise.bearingSigmaDeg = 0.0;
  cfg.noise.rotationSigmaDeg = 0.0;
  InitialLayout l;
  l.observers = {{250, 250, Angle{}}, {750, 250, Angle::fromDegrees(90)}, {500, 750, Angle::fromDegrees(270)}};
  l.guided = {300, 500, Angle{}};
  l.goal = {700, 500};
  cfg.layout = l;
  return cfg;
}

std::size_t countOf(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("sampled layouts respect the inset square and spacing") {
    ScenarioConfig cfg;
    Rng rng(31, 0);
    for (int i = 0; i < 200; ++i) {
      const auto l = sampleLayout(cfg, rng);
      REQUIRE(l.observers.size() == 3);
      std::vector<Point> all;
      for (const auto& o : l.observers) all.push_back(o.position());
      all.push_back(l.guided.position());
      all.push_back(l.goal);
      for (const auto& p : all) {
        CHECK(p.x >= 250.0);
        CHECK(p.x <= 750.0);
        CHECK(p.y >= 250.0);
        CHECK(p.y <= 750.0);
      }
      for (std::size_t a = 0; a < all.size(); ++a)
        for (std::size_t b = a + 1; b < all.size(); ++b) CHECK(distance(all[a], all[b]) >= 10.0);
      CHECK(distance(l.guided.position(), l.goal) > cfg.goalRadius);
      const double k = l.guided.theta.radians() / (2.0 * std::numbers::pi / cfg.m);
      CHECK(std::fabs(k - std::round(k)) < 1e-9);
    }
  }

  TEST_CASE("episodes are reproducible from their seed") {
    for (Method m : {Method::QPF, Method::PFQC, Method::MultipleUpdates}) {
      ScenarioConfig cfg;
      cfg.method = m;
      cfg.m = m == Method::MultipleUpdates ? 8 : 16;
      const auto a = runEpisode(cfg, 77);
      const auto b = runEpisode(cfg, 77);
      CHECK(a.success == b.success);
      CHECK(a.instructions == b.instructions);
      CHECK(a.pathSize == b.pathSize);
      CHECK(a.simTime == b.simTime);
    }
  }

  TEST_CASE("a noiseless straight run reaches the goal") {
    for (Method m : {Method::QPF, Method::PFQC}) {
      const auto cfg = fixedScenario(m);
      const auto r = runEpisode(cfg, 5);
      CHECK(r.success);
      CHECK(r.startGoalDistance == doctest::Approx(400.0));
      // at least the distance to the goal disc, never faster than the commanded speed
      CHECK(r.pathSize >= 350.0 - 1e-6);
      CHECK(r.pathSize <= cfg.translationSpeed * r.simTime + 1e-6);
    }
  }

  TEST_CASE("traces carry poses, commands and filter state") {
    const auto cfg = fixedScenario(Method::QPF);
    std::vector<TraceRecord> records;
    EpisodeOptions opt;
    opt.sink = [&](const TraceRecord& r) { records.push_back(r); };
    const auto res = runEpisode(cfg, 5, opt);
    REQUIRE(records.size() > 2);
    CHECK(records.front().update);
    CHECK(records.back().time == doctest::Approx(res.simTime));
    const auto j = nlohmann::json::parse(traceLine(records.front()));
    CHECK(j.contains("t"));
    CHECK(j["poses"].size() == 5);
    CHECK(j["poses"][3]["id"].get<std::string>() == toString(EntityId::guided()));
    CHECK(j.contains("command"));
    CHECK(j.contains("particles"));
    CHECK(j["particles"].size() == static_cast<std::size_t>(cfg.filter.particleCount));

    const std::string svg = renderSvg(cfg, records);
    CHECK(svg.find("viewBox=\"0 0 1000 1000\"") != std::string::npos);
    CHECK(countOf(svg, "<polyline") == 4);
    CHECK(countOf(svg, "class=\"region-border\"") == 3u * 16u);

    std::vector<TraceRecord> updates;
    opt.mode = TraceMode::PerUpdate;
    opt.sink = [&](const TraceRecord& r) { updates.push_back(r); };
    runEpisode(cfg, 5, opt);
    CHECK(updates.size() < records.size());
    for (const auto& r : updates) CHECK(r.update);
  }

  TEST_CASE("result and summary CSVs") {
    ScenarioConfig cfg;
    cfg.method = Method::SingleCommand;
    cfg.m = 8;
    BatchOptions opt;
    opt.episodes = 6;
    opt.baseSeed = 100;
    opt.threads = 1;
    const auto results = runBatch(cfg, opt);
    REQUIRE(results.size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(results[i].seed == 100u + static_cast<unsigned>(i));

    std::stringstream out;
    writeResultsCsv(out, cfg, results, false);
    const auto table = readCsv(out);
    CHECK(table.rows.size() == 6);
    CHECK(table.column("path_size") >= 0);
    CHECK(table.rows[0][table.column("proc_time_ms")].empty());

    const auto summary = summarizeBatch(cfg, results);
    std::stringstream s;
    writeSummaryCsv(s, {summary}, false);
    const auto st = readCsv(s);
    CHECK(st.rows.size() == 1);
    CHECK(st.rows[0][st.column("episodes")] == "6");
  }

  TEST_CASE("summaries use the sample standard deviation") {
    const auto s = summarize({2, 4, 4, 4, 5, 5, 7, 9});
    CHECK(s.count == 8);
    CHECK(s.mean == doctest::Approx(5.0));
    CHECK(s.stddev == doctest::Approx(std::sqrt(32.0 / 7.0)));
  }

  TEST_CASE("Welch ANOVA against a high-precision reference") {
    const auto w = welchAnova(oracle::kWelchGroups);
    CHECK(w.f == doctest::Approx(oracle::kWelchF).epsilon(1e-10));
    CHECK(w.df1 == doctest::Approx(oracle::kWelchDf1).epsilon(1e-12));
    CHECK(w.df2 == doctest::Approx(oracle::kWelchDf2).epsilon(1e-10));
    CHECK(w.pValue == doctest::Approx(oracle::kWelchP).epsilon(1e-8));
  }

  TEST_CASE("Welch ANOVA edge cases") {
    const auto same = welchAnova({{1, 2, 3}, {1, 2, 3}});
    CHECK(same.f == 0.0);
    CHECK(same.pValue == 1.0);
    CHECK_THROWS_AS(welchAnova({{1, 2, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(welchAnova({{1, 2, 3}, {4}}), std::invalid_argument);
    CHECK_THROWS_AS(welchAnova({{1, 2, 3}, {4, 4, 4}}), std::invalid_argument);
  }

  TEST_CASE("grouping keeps successful rows in first-seen order") {
    std::stringstream in("method,success,path_size\nQPF,1,10\nPFQC,1,20\nQPF,0,99\nQPF,1,12\n");
    const auto groups = groupColumn(readCsv(in), "path_size", "method");
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].first == "QPF");
    CHECK(groups[0].second == std::vector<double>{10, 12});
    CHECK(groups[1].second == std::vector<double>{20});
    std::stringstream again("a,b\n1,2\n");
    CHECK_THROWS_AS(groupColumn(readCsv(again), "missing", "a"), std::invalid_argument);
  }
}
