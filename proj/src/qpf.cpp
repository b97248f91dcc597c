#include "qsrnav/qpf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace qsrnav {

std::vector<starvars::SectorRelation> sectorRelations(const ObservationSet& zc, int observerCount,
                                                      int m) {
  std::vector<starvars::SectorRelation> out;
  for (const auto& t : zc.tuples()) {
    const auto* s = std::get_if<SectorIndex>(&t.measurement);
    if (!s) throw std::invalid_argument("sectorRelations: tuple carries a bearing, not a sector");
    if (s->value < 0 || s->value >= m) throw std::out_of_range("sectorRelations: sector >= m");
    out.push_back(starvars::SectorRelation::atomic(slotOf(t.observer, observerCount), s->value,
                                                   slotOf(t.target, observerCount), m));
  }
  return out;
}

MappingOptions MappingOptions::from(const ScenarioConfig& cfg, bool observerHeadingsKnown) {
  MappingOptions o;
  o.observerCount = cfg.observerCount;
  o.m = cfg.m;
  o.epsilon = cfg.epsilon;
  o.box = starvars::Box{0.0, 0.0, cfg.arenaWidth, cfg.arenaHeight};
  o.observerHeadingsKnown = observerHeadingsKnown;
  return o;
}

std::optional<starvars::WorldModel> qpfMapping(const ObservationSet& zc,
                                               std::span<const Pose> observerPoses,
                                               const MappingOptions& opt,
                                               starvars::SearchStats* stats) {
  if (static_cast<int>(observerPoses.size()) != opt.observerCount)
    throw std::invalid_argument("qpfMapping: one pose per observer required");
  const int n = opt.observerCount + 2;
  const auto relations = sectorRelations(zc, opt.observerCount, opt.m);

  starvars::ModelSearch search;
  search.entityCount = n;
  search.m = opt.m;
  search.oriented.assign(n, true);
  search.oriented[slotOf(EntityId::goal(), opt.observerCount)] = false;
  search.known.assign(n, std::nullopt);
  search.anchors.assign(n, std::nullopt);
  search.box = opt.box;
  search.epsilon = opt.epsilon;
  for (int i = 0; i < opt.observerCount; ++i) search.anchors[i] = observerPoses[i].position();
  if (opt.observerHeadingsKnown) {
    for (const auto& t : zc.tuples()) search.known[slotOf(t.observer, opt.observerCount)] = t.observerHeading;
  }
  search.known[slotOf(EntityId::guided(), opt.observerCount)] = zc.guidedHeading;
  return starvars::searchValidModel(relations, search, stats);
}

RegionSignature regionOf(Point p, std::span<const Pose> observerPoses, int m) {
  RegionSignature sig;
  sig.components.reserve(observerPoses.size());
  for (const auto& o : observerPoses) sig.components.push_back(starvars::sectorOf(o, p, m).value);
  return sig;
}

RegionSignature guidedSignature(const ObservationSet& zc, int observerCount) {
  RegionSignature sig;
  for (int i = 0; i < observerCount; ++i) {
    const auto* t = zc.find(EntityId::observer(i), EntityId::guided());
    if (!t) throw std::out_of_range("guidedSignature: missing observation of the guided agent");
    const auto* s = std::get_if<SectorIndex>(&t->measurement);
    if (!s) throw std::invalid_argument("guidedSignature: tuple carries a bearing");
    sig.components.push_back(s->value);
  }
  return sig;
}

double signatureDistance(const RegionSignature& a, const RegionSignature& b, int m,
                         SignatureMetric metric) {
  if (a.components.size() != b.components.size())
    throw std::invalid_argument("signatureDistance: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    int d = std::abs(a.components[i] - b.components[i]);
    if (metric == SignatureMetric::Circular) d = std::min(d, m - d);
    sum += static_cast<double>(d) * d;
  }
  return std::sqrt(sum);
}

double qpfWeight(const RegionSignature& a, const RegionSignature& b, int m, SignatureMetric metric) {
  return std::exp(-signatureDistance(a, b, m, metric));
}

namespace {

std::optional<RegionSignature> tryRegion(Point p, std::span<const Pose> observers, int m) {
  for (const auto& o : observers)
    if (distance(o.position(), p) < 1e-9) return std::nullopt;
  return regionOf(p, observers, m);
}

}  // namespace

namespace {

// Distance along unit direction (ux, uy) from p until p leaves sector s of
// observer o. Sectors narrower than pi are convex cones, so the exit is the
// first crossing of either bounding line.
double sectorExit(Point p, double ux, double uy, const Pose& o, int s, int m) {
  const double a0 = o.theta.radians() + s * starvars::sectorWidth(m);
  const double a1 = a0 + starvars::sectorWidth(m);
  const double rx = p.x - o.x, ry = p.y - o.y;
  double exit = std::numeric_limits<double>::infinity();
  // inside means left of the lower ray and right of the upper ray
  const double f0 = std::cos(a0) * ry - std::sin(a0) * rx;
  const double v0 = std::cos(a0) * uy - std::sin(a0) * ux;
  if (v0 < 0.0) exit = std::min(exit, std::max(0.0, f0) / -v0);
  const double f1 = std::sin(a1) * rx - std::cos(a1) * ry;
  const double v1 = std::sin(a1) * ux - std::cos(a1) * uy;
  if (v1 < 0.0) exit = std::min(exit, std::max(0.0, f1) / -v1);
  return exit;
}

double boxExit(Point p, double ux, double uy, const starvars::Box& b) {
  if (p.x < b.xMin || p.x > b.xMax || p.y < b.yMin || p.y > b.yMax) return 0.0;
  double exit = std::numeric_limits<double>::infinity();
  if (ux > 0.0) exit = std::min(exit, (b.xMax - p.x) / ux);
  if (ux < 0.0) exit = std::min(exit, (b.xMin - p.x) / ux);
  if (uy > 0.0) exit = std::min(exit, (b.yMax - p.y) / uy);
  if (uy < 0.0) exit = std::min(exit, (b.yMin - p.y) / uy);
  return exit;
}

}  // namespace

void qpfPredictTranslate(Pose& pose, std::span<const Pose> observerPoses, int m, double stepSize,
                         int maxSteps, const std::optional<starvars::Box>& box) {
  const auto start = tryRegion(pose.position(), observerPoses, m);
  const double c = std::cos(pose.theta.radians());
  const double s = std::sin(pose.theta.radians());
  const double x0 = pose.x, y0 = pose.y;

  // Skip the steps that provably stay inside the start region and the box;
  // stepping resumes one step before the analytic exit, so the result is the
  // same as stepping from the start.
  int first = 1;
  if (start && m >= 4) {
    double exit = box ? boxExit({x0, y0}, c, s, *box) : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < observerPoses.size(); ++i)
      exit = std::min(exit, sectorExit({x0, y0}, c, s, observerPoses[i], start->components[i], m));
    if (std::isfinite(exit)) first = std::max(1, static_cast<int>(std::floor(exit / stepSize)));
    else first = maxSteps;
    if (first > maxSteps) first = maxSteps;
    if (first > 1) {
      pose.x = x0 + (first - 1) * stepSize * c;
      pose.y = y0 + (first - 1) * stepSize * s;
    }
  }

  for (int k = first; k <= maxSteps; ++k) {
    double x = x0 + k * stepSize * c;
    double y = y0 + k * stepSize * s;
    if (box) {
      const double cx = std::clamp(x, box->xMin, box->xMax);
      const double cy = std::clamp(y, box->yMin, box->yMax);
      if (cx != x || cy != y) {
        pose.x = cx;
        pose.y = cy;
        return;
      }
    }
    pose.x = x;
    pose.y = y;
    const auto here = tryRegion({x, y}, observerPoses, m);
    if (here && start && *here != *start) return;
  }
}

RegionSignature perceiveSignature(const WorldState& state, int m, double sigmaZ, Rng& rng) {
  RegionSignature sig;
  sig.components.reserve(state.observers.size());
  for (int i = 0; i < static_cast<int>(state.observers.size()); ++i) {
    const Angle b = perceiveBearing(EntityId::observer(i), EntityId::guided(), state, sigmaZ, rng);
    sig.components.push_back(starvars::sectorOfBearing(b, m).value);
  }
  return sig;
}

bool qpfStopCondition(const WorldState& state, const RegionSignature& last, int m, double sigmaZ,
                      Rng& rng, RegionSignature* current) {
  RegionSignature now = perceiveSignature(state, m, sigmaZ, rng);
  const bool changed = now != last;
  if (current) *current = std::move(now);
  return changed;
}

UpdateStatus qpfUpdate(ParticleSet& particles, const ObservationSet& zc,
                       std::span<const Pose> observerPoses, const QpfUpdateOptions& opt, Rng& rng,
                       std::vector<double>* rawWeights) {
  if (!qpfMapping(zc, observerPoses, opt.mapping)) return UpdateStatus::Inconsistent;

  const RegionSignature target = guidedSignature(zc, opt.mapping.observerCount);
  if (rawWeights) rawWeights->clear();
  for (auto& p : particles.guided) {
    const auto sig = tryRegion(p.pose.position(), observerPoses, opt.mapping.m);
    p.weight = sig ? qpfWeight(target, *sig, opt.mapping.m, opt.metric) : 0.0;
    if (rawWeights) rawWeights->push_back(p.weight);
  }
  try {
    particles.guided = resample(particles.guided, rng, opt.resampling);
  } catch (const DegenerateFilter&) {
    return UpdateStatus::Degenerate;
  }
  return UpdateStatus::Updated;
}

}  // namespace qsrnav
