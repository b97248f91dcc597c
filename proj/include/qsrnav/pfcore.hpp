#pragma once

// Generic sample-weight-resample particle filter and the guidance steps shared
// by QPF and PFQC: particle release and modal action selection.

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qsrnav/core.hpp"
#include "qsrnav/scenario.hpp"
#include "qsrnav/starvars.hpp"

namespace qsrnav {

/// Every weight was zero (or not finite); the caller reinitialises the filter.
class DegenerateFilter : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Particle {
  Pose pose;
  double weight = 1.0;
};

struct ParticleSet {
  std::vector<Particle> guided;     // S_g, constant size N
  std::vector<Particle> observers;  // S_o, one zero-spread particle each
  std::vector<Point> goal;          // S_goal, position only
};

struct ReleaseConfig {
  int particleCount = 200;
  double positionSigma = 50.0;               // cm
  double headingSigma = degToRad(5.0);       // rad, used when the heading is known
  int m = 16;                                // Theta_m for unknown headings
  std::optional<Angle> guidedHeading;        // known theta_g
  std::optional<starvars::Box> bounds;       // clamp sampled positions

  static ReleaseConfig from(const ScenarioConfig& cfg, std::optional<Angle> guidedHeading);
};

/// One particle per observer at its model pose, N guided particles around the
/// model's guided position and one goal particle at the model's goal point.
/// Model slots follow slotOf(): observers, guided, goal.
ParticleSet releaseParticles(const starvars::WorldModel& model, int observerCount,
                             const ReleaseConfig& cfg, Rng& rng);

/// Translation part of a motion model, applied after any rotation.
using TranslationModel = std::function<void(Pose&, Rng&)>;

/// Turns rotate the heading by the commanded angle plus N(0, rotationSigma);
/// the translation model then moves the particle. Stop is rejected.
Particle predictSample(Particle p, Command action, double rotationSigma, Rng& rng,
                       const TranslationModel& translate = {});

/// Draws particles.size() particles with replacement, with probability
/// proportional to weight; the result carries uniform weights summing to 1.
std::vector<Particle> resample(std::span<const Particle> particles, Rng& rng,
                               ResamplingScheme scheme = ResamplingScheme::Multinomial);

/// Scales weights to sum to 1. Throws DegenerateFilter when they cannot.
void normalizeWeights(std::vector<Particle>& particles);

/// Modal command over guided particles, each voting
/// commandSector(sectorOf(particle, goal)). Ties resolve in the order
/// Stop > MoveForward > TurnLeft > TurnRight > MoveBackward. Returns Stop when
/// an observer reports the guided agent inside the goal radius.
Command chooseAction(const ParticleSet& particles, int m, bool stopPerceived = false,
                     CommandMap map = CommandMap::Calibrated);

}  // namespace qsrnav
