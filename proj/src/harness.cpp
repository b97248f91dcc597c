#include "qsrnav/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <boost/math/distributions/fisher_f.hpp>
#include <json.hpp>

#include "qsrnav/baselines.hpp"
#include "qsrnav/pfcore.hpp"
#include "qsrnav/pfqc.hpp"
#include "qsrnav/qpf.hpp"
#include "qsrnav/simkernel.hpp"
#include "qsrnav/starvars.hpp"

namespace qsrnav {

std::string toString(FailureReason r) {
  switch (r) {
    case FailureReason::Timeout: return "timeout";
    case FailureReason::ModelFail: return "model_fail";
    case FailureReason::Degenerate: return "degenerate";
  }
  return "?";
}

InitialLayout sampleLayout(const ScenarioConfig& cfg, Rng& rng) {
  const double eta = starvars::sectorWidth(cfg.m);
  const double lo = cfg.insetMargin;
  auto point = [&] {
    return Point{rng.uniform(lo, cfg.arenaWidth - lo), rng.uniform(lo, cfg.arenaHeight - lo)};
  };
  auto heading = [&] { return Angle::fromRadians(rng.uniformInt(0, cfg.m - 1) * eta); };

  for (int attempt = 0; attempt < 10000; ++attempt) {
    InitialLayout l;
    std::vector<Point> all;
    for (int i = 0; i < cfg.observerCount; ++i) {
      const Point p = point();
      l.observers.push_back({p.x, p.y, heading()});
      all.push_back(p);
    }
    const Point g = point();
    l.guided = {g.x, g.y, heading()};
    l.goal = point();
    all.push_back(g);
    all.push_back(l.goal);

    bool ok = distance(g, l.goal) > cfg.goalRadius;
    for (std::size_t i = 0; ok && i < all.size(); ++i)
      for (std::size_t j = i + 1; ok && j < all.size(); ++j) ok = distance(all[i], all[j]) >= 10.0;
    if (ok) return l;
  }
  throw ConfigError("could not sample a layout: inset square too small for the goal radius");
}

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Everything an episode's coordinator and world share.
struct Episode {
  const ScenarioConfig& cfg;
  TickConfig tc;
  WorldState world;
  Rng perception;
  Rng filter;
  ObservationSet zc;
  std::vector<Pose> observerPoses;  // observers know their own poses
  bool sectors = true;              // QPF and baselines report sectors, PFQC bearings

  Episode(const ScenarioConfig& c, std::uint64_t seed)
      : cfg(c), tc(TickConfig::from(c)), perception(seed, 1), filter(seed, 3) {
    world.motionRng = Rng(seed, 2);
  }

  double sigmaZ() const { return degToRad(cfg.noise.bearingSigmaDeg); }

  ObservationTuple observe(int observer, EntityId target) {
    const EntityId o = EntityId::observer(observer);
    const Angle b = perceiveBearing(o, target, world, sigmaZ(), perception);
    Measurement z = b;
    if (sectors) z = starvars::sectorOfBearing(b, cfg.m);
    return {o, z, target, world.observers[observer].theta};
  }

  void observeAll() {
    zc = ObservationSet{};
    for (int i = 0; i < cfg.observerCount; ++i) {
      for (int j = 0; j < cfg.observerCount; ++j)
        if (j != i) zc.insert(observe(i, EntityId::observer(j)));
      zc.insert(observe(i, EntityId::guided()));
      zc.insert(observe(i, EntityId::goal()));
    }
    reportHeading();
  }

  void observeGuided() {
    for (int i = 0; i < cfg.observerCount; ++i) zc.insert(observe(i, EntityId::guided()));
    reportHeading();
  }

  void reportHeading() {
    if (cfg.orientationKnown) zc.guidedHeading = world.guided.theta;
  }
};

enum class StepStatus { Ok, Reinitialise };

class Controller {
 public:
  virtual ~Controller() = default;
  /// Mapping and particle release from the current Z_c. False on failure.
  virtual bool map(Episode& ep) = 0;
  virtual Command choose(Episode& ep) = 0;
  virtual void predict(Episode&, Command) {}
  /// Checked every tick once any rotation has completed.
  virtual bool segmentDone(Episode& ep, double segmentStart) = 0;
  virtual void afterSegment(Episode&, Command, double) {}
  virtual StepStatus update(Episode& ep) = 0;
  virtual void annotate(TraceRecord&, bool) const {}
  virtual int skippedUpdates() const { return 0; }
};

void reanchorHeadings(ParticleSet& s, const Episode& ep, Rng& rng) {
  const double sigma = degToRad(ep.cfg.filter.releaseHeadingSigmaDeg);
  if (!ep.zc.guidedHeading) {
    for (auto& p : s.guided)
      p.pose.theta = Angle::fromRadians(rng.gaussian(p.pose.theta.radians(), sigma));
    return;
  }
  for (auto& p : s.guided)
    p.pose.theta = Angle::fromRadians(rng.gaussian(ep.zc.guidedHeading->radians(), sigma));
}

std::vector<Pose> particlePoses(const ParticleSet& s) {
  std::vector<Pose> out;
  out.reserve(s.guided.size());
  for (const auto& p : s.guided) out.push_back(p.pose);
  return out;
}

// Longest a region-triggered segment may run: a full traverse of the arena
// plus the slowest turn.
double regionSegmentCap(const ScenarioConfig& cfg) {
  return cfg.qpfMaxSteps() * cfg.filter.qpfStepSize / cfg.translationSpeed +
         std::numbers::pi / cfg.angularSpeed;
}

// Shared region-change trigger of QPF and multiple updates.
class RegionTrigger {
 public:
  // A change counts once the same new signature is perceived on
  // regionConfirmTicks consecutive ticks, so bearing noise at a border does
  // not end a segment on its own.
  bool fired(Episode& ep, double segmentStart) {
    RegionSignature now;
    if (qpfStopCondition(ep.world, last, ep.cfg.m, ep.sigmaZ(), ep.perception, &now)) {
      streak = (candidate && *candidate == now) ? streak + 1 : 1;
      candidate = std::move(now);
      if (streak >= ep.cfg.filter.regionConfirmTicks) {
        pending = std::move(candidate);
        candidate.reset();
        streak = 0;
        return true;
      }
    } else {
      candidate.reset();
      streak = 0;
    }
    return ep.world.time - segmentStart >= regionSegmentCap(ep.cfg);
  }

  // Resubmits the sectors that ended the segment (fresh ones after a timeout).
  void submit(Episode& ep) {
    if (!pending) {
      ep.observeGuided();
    } else {
      for (int i = 0; i < ep.cfg.observerCount; ++i) {
        ep.zc.insert({EntityId::observer(i), SectorIndex{pending->components[i]}, EntityId::guided(),
                      ep.world.observers[i].theta});
      }
      ep.reportHeading();
    }
    pending.reset();
    candidate.reset();
    streak = 0;
  }

  RegionSignature last;
  std::optional<RegionSignature> pending;
  std::optional<RegionSignature> candidate;
  int streak = 0;
};

class QpfController : public Controller {
 public:
  bool map(Episode& ep) override {
    auto model = qpfMapping(ep.zc, ep.observerPoses, MappingOptions::from(ep.cfg, true));
    if (!model) return false;
    particles_ = releaseParticles(*model, ep.cfg.observerCount,
                                  ReleaseConfig::from(ep.cfg, ep.zc.guidedHeading), ep.filter);
    trigger_.last = guidedSignature(ep.zc, ep.cfg.observerCount);
    return true;
  }

  Command choose(Episode& ep) override {
    return chooseAction(particles_, ep.cfg.m, false, ep.cfg.commandMap);
  }

  void predict(Episode& ep, Command action) override {
    const double sigma = degToRad(ep.cfg.noise.rotationSigmaDeg);
    const int maxSteps = ep.cfg.qpfMaxSteps();
    const starvars::Box box{0.0, 0.0, ep.cfg.arenaWidth, ep.cfg.arenaHeight};
    const auto& observers = ep.observerPoses;
    const int m = ep.cfg.m;
    const double step = ep.cfg.filter.qpfStepSize;
    TranslationModel move = [&](Pose& p, Rng&) {
      qpfPredictTranslate(p, observers, m, step, maxSteps, box);
    };
    for (auto& p : particles_.guided) p = predictSample(p, action, sigma, ep.filter, move);
  }

  bool segmentDone(Episode& ep, double segmentStart) override {
    return trigger_.fired(ep, segmentStart);
  }

  StepStatus update(Episode& ep) override {
    trigger_.submit(ep);
    QpfUpdateOptions opt;
    opt.mapping = MappingOptions::from(ep.cfg, true);
    opt.metric = ep.cfg.filter.signatureMetric;
    opt.resampling = ep.cfg.filter.resampling;
    if (qpfUpdate(particles_, ep.zc, ep.observerPoses, opt, ep.filter) != UpdateStatus::Updated)
      return StepStatus::Reinitialise;
    trigger_.last = guidedSignature(ep.zc, ep.cfg.observerCount);
    reanchorHeadings(particles_, ep, ep.filter);
    return StepStatus::Ok;
  }

  void annotate(TraceRecord& r, bool update) const override {
    if (update) {
      r.particles = particlePoses(particles_);
      r.signature = trigger_.last;
    }
  }

 private:
  ParticleSet particles_;
  RegionTrigger trigger_;
};

class PfqcController : public Controller {
 public:
  bool map(Episode& ep) override {
    try {
      const auto d = triangulate(ep.zc, ep.observerPoses);
      const auto model = getCoordinates(ep.zc, d, ep.observerPoses, ep.cfg.m);
      particles_ = releaseParticles(model, ep.cfg.observerCount,
                                    ReleaseConfig::from(ep.cfg, ep.zc.guidedHeading), ep.filter);
      estimate_ = model.entities[slotOf(EntityId::guided(), ep.cfg.observerCount)].position();
    } catch (const IllConditionedTriangulation&) {
      return false;
    }
    return true;
  }

  Command choose(Episode& ep) override {
    return chooseAction(particles_, ep.cfg.m, false, ep.cfg.commandMap);
  }

  void predict(Episode& ep, Command action) override {
    const double sigma = degToRad(ep.cfg.noise.rotationSigmaDeg);
    for (auto& p : particles_.guided) p = predictSample(p, action, sigma, ep.filter);
  }

  bool segmentDone(Episode& ep, double segmentStart) override {
    return pfqcStopCondition(ep.world.time, segmentStart, ep.cfg.tau);
  }

  void afterSegment(Episode& ep, Command action, double duration) override {
    // the coordinator knows how long it let the agent walk after turning
    const double elapsed = std::max(0.0, duration - std::fabs(commandTurn(action)) / ep.cfg.angularSpeed);
    for (auto& p : particles_.guided) {
      pfqcPredictTranslate(p.pose, elapsed, ep.cfg.translationSpeed, ep.cfg.filter.distanceSigma,
                           ep.filter);
      p.pose.x = std::clamp(p.pose.x, 0.0, ep.cfg.arenaWidth);
      p.pose.y = std::clamp(p.pose.y, 0.0, ep.cfg.arenaHeight);
    }
  }

  StepStatus update(Episode& ep) override {
    ep.observeGuided();
    const auto st = pfqcUpdate(particles_, ep.zc, ep.observerPoses, ep.cfg.filter.updateSigma,
                               ep.filter, ep.cfg.filter.resampling, nullptr, &estimate_);
    if (st == PfqcUpdateStatus::Degenerate) return StepStatus::Reinitialise;
    if (st == PfqcUpdateStatus::Skipped) ++skipped_;
    reanchorHeadings(particles_, ep, ep.filter);
    return StepStatus::Ok;
  }

  void annotate(TraceRecord& r, bool update) const override {
    if (update) {
      r.particles = particlePoses(particles_);
      r.estimate = estimate_;
    }
  }

  int skippedUpdates() const override { return skipped_; }

 private:
  ParticleSet particles_;
  std::optional<Point> estimate_;
  int skipped_ = 0;
};

class SingleCommandController : public Controller {
 public:
  bool map(Episode& ep) override {
    const auto c = singleCommand(ep.zc, ep.observerPoses, MappingOptions::from(ep.cfg, false),
                                 &state_, ep.cfg.commandMap);
    if (!c) return false;
    command_ = *c;
    return true;
  }
  Command choose(Episode&) override { return command_; }
  // walks on until the goal is reached or time runs out
  bool segmentDone(Episode&, double) override { return false; }
  StepStatus update(Episode&) override { return StepStatus::Ok; }

 private:
  BaselineState state_;
  Command command_ = Command::MoveForward;
};

class MultipleUpdatesController : public Controller {
 public:
  bool map(Episode& ep) override { return rebuild(ep); }
  Command choose(Episode&) override { return command_; }
  bool segmentDone(Episode& ep, double segmentStart) override {
    return trigger_.fired(ep, segmentStart);
  }
  StepStatus update(Episode& ep) override {
    trigger_.submit(ep);
    return rebuild(ep) ? StepStatus::Ok : StepStatus::Reinitialise;
  }
  void annotate(TraceRecord& r, bool update) const override {
    if (update) r.signature = trigger_.last;
  }

 private:
  bool rebuild(Episode& ep) {
    const auto c = multipleUpdates(state_, ep.zc, ep.observerPoses,
                                   MappingOptions::from(ep.cfg, false), ep.cfg.commandMap);
    if (!c) return false;
    command_ = *c;
    trigger_.last = state_.lastSignature;
    return true;
  }

  BaselineState state_;
  RegionTrigger trigger_;
  Command command_ = Command::MoveForward;
};

std::unique_ptr<Controller> makeController(Method m) {
  switch (m) {
    case Method::QPF: return std::make_unique<QpfController>();
    case Method::PFQC: return std::make_unique<PfqcController>();
    case Method::SingleCommand: return std::make_unique<SingleCommandController>();
    case Method::MultipleUpdates: return std::make_unique<MultipleUpdatesController>();
  }
  throw std::logic_error("unknown method");
}

}  // namespace

EpisodeResult runEpisode(const ScenarioConfig& cfg, std::uint64_t seed,
                         const EpisodeOptions& options) {
  validate(cfg);
  const auto wallStart = Clock::now();

  InitialLayout layout;
  if (cfg.layout) {
    layout = *cfg.layout;
  } else {
    Rng sampling(seed, 0);
    layout = sampleLayout(cfg, sampling);
  }

  Episode ep(cfg, seed);
  ep.sectors = cfg.method != Method::PFQC;
  ep.world.observers = layout.observers;
  ep.world.guided = layout.guided;
  ep.world.goal = layout.goal;
  ep.observerPoses = layout.observers;

  EpisodeResult res;
  res.seed = seed;
  res.startGoalDistance = distance(layout.guided.position(), layout.goal);

  auto controller = makeController(cfg.method);
  double procSeconds = 0.0;
  int retries = 0;
  Command lastAction = Command::Stop;  // reported on update records

  auto emit = [&](bool update) {
    if (!options.sink) return;
    if (!update && options.mode == TraceMode::PerUpdate) return;
    TraceRecord r;
    r.time = ep.world.time;
    r.observers = ep.world.observers;
    r.guided = ep.world.guided;
    r.goal = ep.world.goal;
    r.command = update ? lastAction : ep.world.activeCommand;
    r.update = update;
    controller->annotate(r, update && options.includeParticles);
    options.sink(r);
  };

  // Observe everything and map, re-observing on failure within the retry cap.
  auto initialise = [&]() -> bool {
    while (true) {
      ep.observeAll();
      const auto t0 = Clock::now();
      const bool ok = controller->map(ep);
      procSeconds += secondsSince(t0);
      if (ok) return true;
      if (++retries > cfg.filter.retryCap) return false;
    }
  };

  auto finish = [&](bool success, std::optional<FailureReason> why) {
    res.success = success;
    res.failure = why;
    res.pathSize = ep.world.pathLength;
    res.simTime = ep.world.time;
    res.reinitialisations = retries;
    res.skippedUpdates = controller->skippedUpdates();
    res.procTimeMs = res.instructions > 0 ? 1000.0 * procSeconds / res.instructions : 0.0;
    res.wallTime = secondsSince(wallStart);
    return res;
  };

  try {
    if (!initialise()) return finish(false, FailureReason::ModelFail);
    emit(true);
    if (goalReached(ep.world, cfg.goalRadius)) return finish(true, std::nullopt);

    const double timeout = cfg.episodeTimeout - 1e-9;
    while (ep.world.time < timeout) {
      auto t0 = Clock::now();
      const Command action = controller->choose(ep);
      lastAction = action;
      controller->predict(ep, action);
      procSeconds += secondsSince(t0);

      applyCommand(ep.world, action, ep.tc);
      ++res.instructions;
      const double segmentStart = ep.world.time;
      bool stopped = false;
      while (ep.world.time < timeout) {
        tick(ep.world, ep.tc);
        emit(false);
        if (goalReached(ep.world, cfg.goalRadius)) {
          applyCommand(ep.world, Command::Stop, ep.tc);
          emit(true);
          return finish(true, std::nullopt);
        }
        if (!ep.world.rotating() && controller->segmentDone(ep, segmentStart)) {
          stopped = true;
          break;
        }
      }
      if (!stopped) break;
      applyCommand(ep.world, Command::Stop, ep.tc);
      controller->afterSegment(ep, action, ep.world.time - segmentStart);

      t0 = Clock::now();
      const StepStatus st = controller->update(ep);
      procSeconds += secondsSince(t0);
      if (st == StepStatus::Reinitialise) {
        if (++retries > cfg.filter.retryCap) return finish(false, FailureReason::Degenerate);
        if (!initialise()) return finish(false, FailureReason::ModelFail);
      }
      emit(true);
    }
  } catch (const starvars::NumericalFailure&) {
    return finish(false, FailureReason::ModelFail);
  } catch (const starvars::UndefinedDirection&) {
    // an observer and the guided agent met; the coordinator loses its fix
    return finish(false, FailureReason::Degenerate);
  }
  return finish(false, FailureReason::Timeout);
}

std::vector<EpisodeResult> runBatch(const ScenarioConfig& cfg, const BatchOptions& options) {
  if (options.episodes < 1) throw std::invalid_argument("runBatch: episodes must be >= 1");
  validate(cfg);
  std::vector<EpisodeResult> results(options.episodes);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};

  auto worker = [&] {
    while (!failed) {
      const int i = next.fetch_add(1);
      if (i >= options.episodes) return;
      try {
        results[i] = runEpisode(cfg, options.baseSeed + static_cast<std::uint64_t>(i));
        results[i].episode = i;
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };

  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, options.episodes);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.count;
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (s.count - 1));
  }
  return s;
}

BatchSummary summarizeBatch(const ScenarioConfig& cfg, const std::vector<EpisodeResult>& results) {
  BatchSummary b;
  b.method = cfg.method;
  b.m = cfg.m;
  b.tau = cfg.method == Method::PFQC ? cfg.tau : 0.0;
  b.orientationKnown = cfg.orientationKnown;
  b.episodes = static_cast<int>(results.size());
  std::vector<double> instr, proc, path;
  for (const auto& r : results) {
    if (!r.success) continue;
    ++b.successes;
    instr.push_back(r.instructions);
    proc.push_back(r.procTimeMs);
    path.push_back(r.pathSize);
  }
  b.successPct = b.episodes > 0 ? 100.0 * b.successes / b.episodes : 0.0;
  b.instructions = summarize(instr);
  b.procTimeMs = summarize(proc);
  b.pathSize = summarize(path);
  return b;
}

WelchResult welchAnova(const std::vector<std::vector<double>>& groups) {
  const std::size_t k = groups.size();
  if (k < 2) throw std::invalid_argument("welchAnova: needs at least two groups");
  std::vector<double> w(k), mean(k), n(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (groups[i].size() < 2) throw std::invalid_argument("welchAnova: group with fewer than two samples");
    const auto s = summarize(groups[i]);
    const double var = s.stddev * s.stddev;
    if (!(var > 0.0)) throw std::invalid_argument("welchAnova: zero-variance group");
    n[i] = static_cast<double>(groups[i].size());
    mean[i] = s.mean;
    w[i] = n[i] / var;
  }
  const double W = std::accumulate(w.begin(), w.end(), 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < k; ++i) grand += w[i] * mean[i];
  grand /= W;

  double between = 0.0, lambda = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    between += w[i] * (mean[i] - grand) * (mean[i] - grand);
    const double r = 1.0 - w[i] / W;
    lambda += r * r / (n[i] - 1.0);
  }
  const double kd = static_cast<double>(k);
  WelchResult res;
  res.df1 = kd - 1.0;
  res.f = (between / res.df1) / (1.0 + 2.0 * (kd - 2.0) / (kd * kd - 1.0) * lambda);
  res.df2 = (kd * kd - 1.0) / (3.0 * lambda);
  boost::math::fisher_f dist(res.df1, res.df2);
  res.pValue = res.f > 0.0 ? boost::math::cdf(boost::math::complement(dist, res.f)) : 1.0;
  return res;
}

namespace {

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string orientationLabel(bool known) { return known ? "known" : "unknown"; }

std::string tauLabel(Method m, double tau) { return m == Method::PFQC ? fmt(tau, 1) : ""; }

}  // namespace

void writeResultsCsv(std::ostream& out, const ScenarioConfig& cfg,
                     const std::vector<EpisodeResult>& results, bool timing) {
  out << "episode,seed,method,m,tau,orientation,success,failure,instructions,proc_time_ms,"
         "path_size,sim_time,reinitialisations,start_goal_distance,wall_time\n";
  for (const auto& r : results) {
    out << r.episode << ',' << r.seed << ',' << toString(cfg.method) << ',' << cfg.m << ','
        << tauLabel(cfg.method, cfg.tau) << ',' << orientationLabel(cfg.orientationKnown) << ','
        << (r.success ? 1 : 0) << ',' << (r.failure ? toString(*r.failure) : "") << ','
        << r.instructions << ',' << (timing ? fmt(r.procTimeMs, 4) : "") << ','
        << fmt(r.pathSize, 3) << ',' << fmt(r.simTime, 1) << ',' << r.reinitialisations << ','
        << fmt(r.startGoalDistance, 3) << ',' << (timing ? fmt(r.wallTime, 4) : "") << '\n';
  }
}

void writeSummaryCsv(std::ostream& out, const std::vector<BatchSummary>& summaries, bool timing) {
  out << "method,m,tau,orientation,episodes,success_pct,instr_mean,instr_std,proc_time_ms_mean,"
         "proc_time_ms_std,path_mean,path_std\n";
  for (const auto& s : summaries) {
    out << toString(s.method) << ',' << s.m << ',' << tauLabel(s.method, s.tau) << ','
        << orientationLabel(s.orientationKnown) << ',' << s.episodes << ',' << fmt(s.successPct, 1)
        << ',' << fmt(s.instructions.mean, 3) << ',' << fmt(s.instructions.stddev, 3) << ','
        << (timing ? fmt(s.procTimeMs.mean, 4) : "") << ','
        << (timing ? fmt(s.procTimeMs.stddev, 4) : "") << ',' << fmt(s.pathSize.mean, 3) << ','
        << fmt(s.pathSize.stddev, 3) << '\n';
  }
}

namespace {

nlohmann::json poseJson(const Pose& p, const std::string& id) {
  return {{"id", id}, {"x", p.x}, {"y", p.y}, {"theta", p.theta.degrees()}};
}

}  // namespace

std::string traceLine(const TraceRecord& r) {
  nlohmann::json j;
  j["t"] = r.time;
  auto poses = nlohmann::json::array();
  for (int i = 0; i < static_cast<int>(r.observers.size()); ++i)
    poses.push_back(poseJson(r.observers[i], toString(EntityId::observer(i))));
  poses.push_back(poseJson(r.guided, toString(EntityId::guided())));
  poses.push_back({{"id", toString(EntityId::goal())}, {"x", r.goal.x}, {"y", r.goal.y}});
  j["poses"] = std::move(poses);
  j["command"] = toString(r.command);
  if (r.particles) {
    auto ps = nlohmann::json::array();
    for (const auto& p : *r.particles) ps.push_back({p.x, p.y, p.theta.degrees()});
    j["particles"] = std::move(ps);
  }
  if (r.signature) j["signature"] = r.signature->components;
  if (r.estimate) j["estimate"] = {r.estimate->x, r.estimate->y};
  return j.dump();
}

std::string renderSvg(const ScenarioConfig& cfg, const std::vector<TraceRecord>& records) {
  std::ostringstream s;
  const double W = cfg.arenaWidth, H = cfg.arenaHeight;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << fmt(W, 0) << ' ' << fmt(H, 0)
    << "\" width=\"" << fmt(W, 0) << "\" height=\"" << fmt(H, 0) << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << fmt(W, 0) << "\" height=\"" << fmt(H, 0)
    << "\" fill=\"white\" stroke=\"black\"/>\n";
  // world y points up; flip so the picture reads like the arena
  s << "<g transform=\"translate(0," << fmt(H, 0) << ") scale(1,-1)\">\n";
  if (records.empty()) {
    s << "</g>\n</svg>\n";
    return s.str();
  }
  const auto& first = records.front();
  const int no = static_cast<int>(first.observers.size());

  if (cfg.method == Method::QPF || cfg.method == Method::MultipleUpdates) {
    const double eta = starvars::sectorWidth(cfg.m);
    const double len = cfg.arenaDiagonal();
    for (const auto& o : first.observers) {
      for (int k = 0; k < cfg.m; ++k) {
        const double a = o.theta.radians() + k * eta;
        s << "<line class=\"region-border\" x1=\"" << fmt(o.x, 2) << "\" y1=\"" << fmt(o.y, 2)
          << "\" x2=\"" << fmt(o.x + len * std::cos(a), 2) << "\" y2=\""
          << fmt(o.y + len * std::sin(a), 2) << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
      }
    }
  }

  s << "<circle class=\"goal\" cx=\"" << fmt(first.goal.x, 2) << "\" cy=\"" << fmt(first.goal.y, 2)
    << "\" r=\"" << fmt(cfg.goalRadius, 2) << "\" fill=\"none\" stroke=\"orange\"/>\n";

  const TraceRecord* lastParticles = nullptr;
  for (const auto& r : records)
    if (r.particles) lastParticles = &r;
  if (lastParticles) {
    for (const auto& p : *lastParticles->particles)
      s << "<circle class=\"particle\" cx=\"" << fmt(p.x, 2) << "\" cy=\"" << fmt(p.y, 2)
        << "\" r=\"2\" fill=\"gray\"/>\n";
  }

  auto polyline = [&](const std::string& id, const std::string& colour, auto&& at) {
    s << "<polyline class=\"trajectory\" data-agent=\"" << id << "\" fill=\"none\" stroke=\""
      << colour << "\" stroke-width=\"3\" points=\"";
    for (std::size_t i = 0; i < records.size(); ++i) {
      const Pose p = at(records[i]);
      s << (i ? " " : "") << fmt(p.x, 2) << ',' << fmt(p.y, 2);
    }
    if (records.size() == 1) {
      const Pose p = at(records[0]);
      s << ' ' << fmt(p.x, 2) << ',' << fmt(p.y, 2);
    }
    s << "\"/>\n";
  };
  for (int i = 0; i < no; ++i)
    polyline(toString(EntityId::observer(i)), colourLabel(EntityId::observer(i)),
             [i](const TraceRecord& r) { return r.observers[i]; });
  polyline(toString(EntityId::guided()), colourLabel(EntityId::guided()),
           [](const TraceRecord& r) { return r.guided; });
  s << "</g>\n</svg>\n";
  return s.str();
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable readCsv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CSV file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = splitCsv(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto row = splitCsv(line);
    if (row.size() != t.header.size()) throw std::runtime_error("CSV row width differs from header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<std::pair<std::string, std::vector<double>>> groupColumn(const CsvTable& t,
                                                                      const std::string& column,
                                                                      const std::string& by) {
  const int c = t.column(column), g = t.column(by), ok = t.column("success");
  if (c < 0) throw std::invalid_argument("no column named " + column);
  if (g < 0) throw std::invalid_argument("no column named " + by);
  std::vector<std::pair<std::string, std::vector<double>>> out;
  for (const auto& row : t.rows) {
    if (ok >= 0 && row[ok] != "1") continue;
    if (row[c].empty()) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == row[g]; });
    if (it == out.end()) {
      out.emplace_back(row[g], std::vector<double>{});
      it = std::prev(out.end());
    }
    it->second.push_back(std::stod(row[c]));
  }
  return out;
}

}  // namespace qsrnav
