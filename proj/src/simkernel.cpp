#include "qsrnav/simkernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qsrnav/starvars.hpp"

namespace qsrnav {

TickConfig TickConfig::from(const ScenarioConfig& cfg) {
  TickConfig t;
  t.dt = cfg.dt;
  t.translationSpeed = cfg.translationSpeed;
  t.angularSpeed = cfg.angularSpeed;
  t.arenaWidth = cfg.arenaWidth;
  t.arenaHeight = cfg.arenaHeight;
  t.rotationSigma = degToRad(cfg.noise.rotationSigmaDeg);
  t.speedErrorSigma = cfg.noise.speedErrorSigma;
  t.lateralSlipSigma = cfg.noise.lateralSlipSigma;
  return t;
}

double commandTurn(Command c) {
  switch (c) {
    case Command::TurnLeft: return std::numbers::pi / 2;
    case Command::TurnRight: return -std::numbers::pi / 2;
    case Command::MoveBackward: return std::numbers::pi;
    default: return 0.0;
  }
}

Pose WorldState::pose(EntityId id) const {
  switch (id.kind) {
    case EntityKind::Guided: return guided;
    case EntityKind::Goal: return {goal.x, goal.y, Angle{}};
    default: return observers.at(id.index);
  }
}

void applyCommand(WorldState& state, Command cmd, const TickConfig& cfg) {
  state.activeCommand = cmd;
  state.rotationRemaining = 0.0;
  if (cmd == Command::Stop) return;
  if (cmd != Command::MoveForward)
    state.rotationRemaining = commandTurn(cmd) + state.motionRng.gaussian(0.0, cfg.rotationSigma);
  state.speedFactor = 1.0 + state.motionRng.gaussian(0.0, cfg.speedErrorSigma);
  state.lateralSlip = state.motionRng.gaussian(0.0, cfg.lateralSlipSigma);
}

void tick(WorldState& state, const TickConfig& cfg) {
  ++state.ticks;
  state.time = static_cast<double>(state.ticks) * cfg.dt;
  if (state.activeCommand == Command::Stop) return;

  if (state.rotating()) {
    const double step = cfg.angularSpeed * cfg.dt;
    const double turn = std::clamp(state.rotationRemaining, -step, step);
    state.guided.theta = Angle::fromRadians(state.guided.theta.radians() + turn);
    state.rotationRemaining -= turn;
    if (std::fabs(state.rotationRemaining) < 1e-12) state.rotationRemaining = 0.0;
    return;
  }

  const double th = state.guided.theta.radians();
  const double ahead = std::max(0.0, state.speedFactor) * cfg.translationSpeed * cfg.dt;
  const double side = state.lateralSlip * cfg.dt;
  const double nx = state.guided.x + ahead * std::cos(th) - side * std::sin(th);
  const double ny = state.guided.y + ahead * std::sin(th) + side * std::cos(th);
  const Point before = state.guided.position();
  state.guided.x = std::clamp(nx, 0.0, cfg.arenaWidth);
  state.guided.y = std::clamp(ny, 0.0, cfg.arenaHeight);
  state.pathLength += distance(before, state.guided.position());
}

Angle perceiveBearing(EntityId observer, EntityId target, const WorldState& state,
                      double sigmaZ, Rng& rng) {
  if (!observer.isObserver()) throw std::invalid_argument("perceiveBearing: not an observer");
  if (observer == target) throw std::invalid_argument("perceiveBearing: observer equals target");
  const Pose o = state.pose(observer);
  const Point t = state.pose(target).position();
  const double dx = t.x - o.x, dy = t.y - o.y;
  if (std::hypot(dx, dy) < 1e-9)
    throw starvars::UndefinedDirection("perceiveBearing: coincident positions");
  const double noise = rng.gaussian(0.0, sigmaZ);
  return normalizeAngle(std::atan2(dy, dx) - o.theta.radians() + noise);
}

bool goalReached(const WorldState& state, double goalRadius) {
  return distance(state.guided.position(), state.goal) <= goalRadius;
}

TickRecord snapshot(const WorldState& state) {
  return {state.time, state.observers, state.guided, state.activeCommand};
}

}  // namespace qsrnav
