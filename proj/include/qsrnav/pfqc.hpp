#pragma once

// Particle Filter with Qualitative Commands: numeric mapping from bearing
// triangulation, Gaussian translation prediction and a tau-timed Gaussian
// importance update. Commands still come from the StarVars agent model.

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qsrnav/core.hpp"
#include "qsrnav/pfcore.hpp"
#include "qsrnav/starvars.hpp"

namespace qsrnav {

/// Sight lines are (nearly) parallel, so no unique intersection exists.
class IllConditionedTriangulation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Global-frame bearing alpha_ij = theta_i + relative bearing.
struct BearingObservation {
  EntityId observer;
  EntityId target;
  Angle alpha;
};

/// Global bearings of every bearing tuple of Z_c that targets `target`.
std::vector<BearingObservation> globalBearings(const ObservationSet& zc, EntityId target);

/// Least-squares intersection of the bearing lines: the point minimising the
/// summed squared perpendicular distances. `residual` receives that sum.
Point intersectBearings(std::span<const BearingObservation> rays,
                        std::span<const Pose> observerPoses, double* residual = nullptr);

/// Coordinator-to-entity distances, D.
struct DistanceTable {
  std::map<EntityId, double> distance;
  std::map<EntityId, Point> point;  // the triangulated position itself
};

/// Triangulates every non-observer target of Z_c. Throws
/// IllConditionedTriangulation when fewer than two usable rays exist or they
/// are near parallel.
DistanceTable triangulate(const ObservationSet& zc, std::span<const Pose> observerPoses);

/// Polar placement from the coordinator: position = coordinator + D * (cos
/// alpha_ci, sin alpha_ci). Observers keep their poses and reported headings;
/// the guided heading comes from Z_c when known.
starvars::WorldModel getCoordinates(const ObservationSet& zc, const DistanceTable& d,
                                    std::span<const Pose> observerPoses, int m);

/// Advances along the heading by max(0, N(speed * elapsed, sigma)); a
/// non-positive elapsed time leaves the pose unchanged.
void pfqcPredictTranslate(Pose& pose, double elapsed, double speed, double sigmaDist, Rng& rng);

/// True iff now - lastUpdateTime >= tau (inclusive, tick-rounding tolerant).
bool pfqcStopCondition(double now, double lastUpdateTime, double tau);

/// exp(-d^2 / (2 sigma^2)).
double pfqcWeight(double d, double sigma);

enum class PfqcUpdateStatus { Updated, Skipped, Degenerate };

/// Re-triangulates the guided agent, weights particles by the Gaussian kernel
/// of their distance to it and resamples. A failed triangulation skips the
/// update and leaves the particles untouched.
PfqcUpdateStatus pfqcUpdate(ParticleSet& particles, const ObservationSet& zc,
                            std::span<const Pose> observerPoses, double sigmaUpdate, Rng& rng,
                            ResamplingScheme scheme = ResamplingScheme::Multinomial,
                            std::vector<double>* rawWeights = nullptr,
                            std::optional<Point>* estimate = nullptr);

}  // namespace qsrnav
