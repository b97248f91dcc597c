#pragma once

// Qualitative Particle Filter: LP mapping of sector observations, region
// signatures over the observers' sector lines, region-crossing prediction and
// the exponential region-distance update.

#include <optional>
#include <span>
#include <vector>

#include "qsrnav/core.hpp"
#include "qsrnav/pfcore.hpp"
#include "qsrnav/scenario.hpp"
#include "qsrnav/simkernel.hpp"
#include "qsrnav/starvars.hpp"

namespace qsrnav {

/// One sector index per observer, ordered by observer index.
struct RegionSignature {
  std::vector<int> components;
  bool operator==(const RegionSignature&) const = default;
};

/// Sector tuples of Z_c as StarVars relations over model slots.
std::vector<starvars::SectorRelation> sectorRelations(const ObservationSet& zc, int observerCount,
                                                      int m);

struct MappingOptions {
  int observerCount = 3;
  int m = 16;
  double epsilon = -1.0;
  std::optional<starvars::Box> box;
  /// QPF fixes each observer's heading to the one it reports. The pure
  /// StarVars baselines leave them to the orientation search.
  bool observerHeadingsKnown = true;

  static MappingOptions from(const ScenarioConfig& cfg, bool observerHeadingsKnown);
};

/// Builds the StarVars program of Z_c and returns its first valid model, or
/// nullopt when the observations are inconsistent. Observers' positions are
/// anchored to their own (known) poses. Z_c must carry each observer's tuples
/// for the heading it reports. Throws starvars::NumericalFailure.
std::optional<starvars::WorldModel> qpfMapping(const ObservationSet& zc,
                                               std::span<const Pose> observerPoses,
                                               const MappingOptions& opt,
                                               starvars::SearchStats* stats = nullptr);

/// Component i is sectorOf(observer i, point). Throws UndefinedDirection when
/// the point coincides with an observer.
RegionSignature regionOf(Point p, std::span<const Pose> observerPoses, int m);

/// Signature of the guided agent as carried by Z_c. Throws std::out_of_range
/// when an observer's tuple is missing.
RegionSignature guidedSignature(const ObservationSet& zc, int observerCount);

double signatureDistance(const RegionSignature& a, const RegionSignature& b, int m,
                         SignatureMetric metric = SignatureMetric::Literal);

/// w = exp(-||a - b||_2).
double qpfWeight(const RegionSignature& a, const RegionSignature& b, int m,
                 SignatureMetric metric = SignatureMetric::Literal);

/// Advances the pose along its heading in stepSize increments until its
/// region signature changes or maxSteps steps were taken. With a box, motion
/// stops at the boundary as the real agent is clamped there.
void qpfPredictTranslate(Pose& pose, std::span<const Pose> observerPoses, int m,
                         double stepSize, int maxSteps,
                         const std::optional<starvars::Box>& box = std::nullopt);

/// Quantises each observer's noisy bearing of the guided agent into a sector.
RegionSignature perceiveSignature(const WorldState& state, int m, double sigmaZ, Rng& rng);

/// True when the freshly perceived signature differs from `last`; the
/// perceived signature is returned through `current`.
bool qpfStopCondition(const WorldState& state, const RegionSignature& last, int m, double sigmaZ,
                      Rng& rng, RegionSignature* current = nullptr);

enum class UpdateStatus { Updated, Inconsistent, Degenerate };

struct QpfUpdateOptions {
  MappingOptions mapping;
  SignatureMetric metric = SignatureMetric::Literal;
  ResamplingScheme resampling = ResamplingScheme::Multinomial;
};

/// Consistency check of Z_c, weighting by region distance to the guided
/// agent's reported signature, then resampling. `rawWeights`, when given,
/// receives the weights before normalisation.
UpdateStatus qpfUpdate(ParticleSet& particles, const ObservationSet& zc,
                       std::span<const Pose> observerPoses, const QpfUpdateOptions& opt, Rng& rng,
                       std::vector<double>* rawWeights = nullptr);

}  // namespace qsrnav
