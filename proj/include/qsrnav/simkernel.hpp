#pragma once

// Deterministic fixed-step 2D world: kinematic guided agent executing
// qualitative commands, noisy bearing perception and goal detection.

#include <functional>
#include <optional>
#include <vector>

#include "qsrnav/core.hpp"
#include "qsrnav/scenario.hpp"

namespace qsrnav {

struct TickConfig {
  double dt = 0.1;                 // s
  double translationSpeed = 10.0;  // cm/s
  double angularSpeed = 0.31;      // rad/s
  double arenaWidth = 1000.0;
  double arenaHeight = 1000.0;
  double rotationSigma = degToRad(2.0);  // rad, delta_t on commanded turns
  double speedErrorSigma = 0.0;          // relative
  double lateralSlipSigma = 0.0;         // cm/s

  static TickConfig from(const ScenarioConfig& cfg);
};

/// Commanded turn of a motion command in radians: 0, +pi/2, -pi/2 or pi.
double commandTurn(Command c);

struct WorldState {
  double time = 0.0;  // ticks * dt, recomputed each tick to avoid drift
  long ticks = 0;
  std::vector<Pose> observers;  // index 0 is the coordinator
  Pose guided;
  Point goal;

  Command activeCommand = Command::Stop;
  double rotationRemaining = 0.0;  // signed rad still to turn before moving
  double speedFactor = 1.0;        // 1 + speed error of the current command
  double lateralSlip = 0.0;        // cm/s of the current command
  double pathLength = 0.0;         // integrated guided-agent displacement, cm

  Rng motionRng{0, 2};

  bool rotating() const { return rotationRemaining != 0.0; }
  Pose pose(EntityId id) const;
};

/// Starts executing `cmd`. Turns enqueue their rotation plus N(0, sigma) and
/// continue forward once the rotation completes; Stop freezes the agent.
void applyCommand(WorldState& state, Command cmd, const TickConfig& cfg);

/// Advances the world by exactly one dt.
void tick(WorldState& state, const TickConfig& cfg);

/// Bearing of `target` relative to `observer`'s heading plus N(0, sigmaZ).
/// Throws std::invalid_argument for non-observers or identical entities and
/// starvars::UndefinedDirection for coincident positions.
Angle perceiveBearing(EntityId observer, EntityId target, const WorldState& state,
                      double sigmaZ, Rng& rng);

/// Inclusive: distance(guided, goal) <= goalRadius.
bool goalReached(const WorldState& state, double goalRadius);

/// One record per tick for trace sinks.
struct TickRecord {
  double time = 0.0;
  std::vector<Pose> observers;
  Pose guided;
  Command command = Command::Stop;
};

using TickSink = std::function<void(const TickRecord&)>;

TickRecord snapshot(const WorldState& state);

}  // namespace qsrnav
