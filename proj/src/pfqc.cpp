#include "qsrnav/pfqc.hpp"

#include <algorithm>
#include <cmath>

namespace qsrnav {

namespace {

// Smallest accepted det / trace^2 of the normal matrix (about the ratio of
// its eigenvalues); two rays meeting at under ~0.1 degrees count as parallel.
constexpr double kMinConditionRatio = 1e-6;

}  // namespace

std::vector<BearingObservation> globalBearings(const ObservationSet& zc, EntityId target) {
  std::vector<BearingObservation> out;
  for (const auto& t : zc.tuples()) {
    if (t.target != target) continue;
    const auto* a = std::get_if<Angle>(&t.measurement);
    if (!a) throw std::invalid_argument("globalBearings: tuple carries a sector, not a bearing");
    out.push_back({t.observer, t.target, t.observerHeading + *a});
  }
  return out;
}

Point intersectBearings(std::span<const BearingObservation> rays,
                        std::span<const Pose> observerPoses, double* residual) {
  if (rays.size() < 2) throw IllConditionedTriangulation("triangulation needs two sight lines");
  // normal equations of sum_i (n_i . x - n_i . p_i)^2
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (const auto& r : rays) {
    const Pose& o = observerPoses[r.observer.index];
    const double nx = -std::sin(r.alpha.radians());
    const double ny = std::cos(r.alpha.radians());
    const double c = nx * o.x + ny * o.y;
    a11 += nx * nx;
    a12 += nx * ny;
    a22 += ny * ny;
    b1 += nx * c;
    b2 += ny * c;
  }
  const double det = a11 * a22 - a12 * a12;
  const double tr = a11 + a22;
  if (!(det > kMinConditionRatio * tr * tr))
    throw IllConditionedTriangulation("sight lines are parallel or nearly so");
  const Point p{(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
  if (residual) {
    double sum = 0.0;
    for (const auto& r : rays) {
      const Pose& o = observerPoses[r.observer.index];
      const double e = -std::sin(r.alpha.radians()) * (p.x - o.x) + std::cos(r.alpha.radians()) * (p.y - o.y);
      sum += e * e;
    }
    *residual = sum;
  }
  return p;
}

DistanceTable triangulate(const ObservationSet& zc, std::span<const Pose> observerPoses) {
  DistanceTable d;
  const Point coordinator = observerPoses.front().position();
  for (EntityId target : {EntityId::guided(), EntityId::goal()}) {
    const auto rays = globalBearings(zc, target);
    if (rays.empty()) continue;
    const Point p = intersectBearings(rays, observerPoses);
    d.point[target] = p;
    d.distance[target] = distance(coordinator, p);
  }
  return d;
}

starvars::WorldModel getCoordinates(const ObservationSet& zc, const DistanceTable& d,
                                    std::span<const Pose> observerPoses, int m) {
  const int no = static_cast<int>(observerPoses.size());
  starvars::WorldModel model;
  model.m = m;
  model.entities.resize(no + 2);
  for (int i = 0; i < no; ++i) {
    model.entities[i] = {observerPoses[i].x, observerPoses[i].y, observerPoses[i].theta};
  }
  for (const auto& t : zc.tuples())
    if (t.observer.isObserver()) model.entities[slotOf(t.observer, no)].theta = t.observerHeading;

  const Pose& c = observerPoses.front();
  for (EntityId target : {EntityId::guided(), EntityId::goal()}) {
    const auto it = d.distance.find(target);
    if (it == d.distance.end()) throw std::out_of_range("getCoordinates: missing distance for " + toString(target));
    const auto* t = zc.find(EntityId::observer(0), target);
    if (!t) throw std::out_of_range("getCoordinates: coordinator has no bearing to " + toString(target));
    const auto* rel = std::get_if<Angle>(&t->measurement);
    if (!rel) throw std::invalid_argument("getCoordinates: tuple carries a sector");
    const double alpha = (t->observerHeading + *rel).radians();
    auto& e = model.entities[slotOf(target, no)];
    e.x = c.x + it->second * std::cos(alpha);
    e.y = c.y + it->second * std::sin(alpha);
  }
  model.entities[slotOf(EntityId::guided(), no)].theta = zc.guidedHeading;
  model.entities[slotOf(EntityId::goal(), no)].theta.reset();
  return model;
}

void pfqcPredictTranslate(Pose& pose, double elapsed, double speed, double sigmaDist, Rng& rng) {
  if (!(elapsed > 0.0)) return;
  const double d = std::max(0.0, rng.gaussian(speed * elapsed, sigmaDist));
  pose.x += d * std::cos(pose.theta.radians());
  pose.y += d * std::sin(pose.theta.radians());
}

bool pfqcStopCondition(double now, double lastUpdateTime, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("pfqcStopCondition: tau must be positive");
  return now - lastUpdateTime >= tau - 1e-9;
}

double pfqcWeight(double d, double sigma) { return std::exp(-d * d / (2.0 * sigma * sigma)); }

PfqcUpdateStatus pfqcUpdate(ParticleSet& particles, const ObservationSet& zc,
                            std::span<const Pose> observerPoses, double sigmaUpdate, Rng& rng,
                            ResamplingScheme scheme, std::vector<double>* rawWeights,
                            std::optional<Point>* estimate) {
  Point g;
  try {
    const auto rays = globalBearings(zc, EntityId::guided());
    g = intersectBearings(rays, observerPoses);
  } catch (const IllConditionedTriangulation&) {
    if (estimate) estimate->reset();
    return PfqcUpdateStatus::Skipped;
  }
  if (estimate) *estimate = g;
  if (rawWeights) rawWeights->clear();
  for (auto& p : particles.guided) {
    p.weight = pfqcWeight(distance(p.pose.position(), g), sigmaUpdate);
    if (rawWeights) rawWeights->push_back(p.weight);
  }
  try {
    particles.guided = resample(particles.guided, rng, scheme);
  } catch (const DegenerateFilter&) {
    return PfqcUpdateStatus::Degenerate;
  }
  return PfqcUpdateStatus::Updated;
}

}  // namespace qsrnav
