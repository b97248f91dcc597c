#pragma once

// Particle-free reference methods that act directly on a StarVars world model:
// a single command per episode, or a fresh model and command on every region
// change.

#include <optional>
#include <span>

#include "qsrnav/core.hpp"
#include "qsrnav/qpf.hpp"
#include "qsrnav/starvars.hpp"

namespace qsrnav {

/// True when the model places the guided agent on the goal point, which
/// happens whenever both lie in the same region.
bool sharesGoalPoint(const starvars::WorldModel& model, int observerCount);

/// Command for the guided agent read off a world model: the goal's sector in
/// the guided agent's modelled frame, mapped through commandSector. A guided
/// agent with no modelled heading is taken to face 0. Coincident guided and
/// goal positions give TurnLeft, so repeated visits to the goal's region
/// cross it along different lines.
Command modelCommand(const starvars::WorldModel& model, int observerCount,
                     CommandMap map = CommandMap::Calibrated);

struct BaselineState {
  std::optional<starvars::WorldModel> currentModel;
  RegionSignature lastSignature;
  int commandsIssued = 0;
  int modelBuilds = 0;
};

/// Builds a model from Z_c (observer headings left to the orientation search)
/// and returns the one command of the episode, or nullopt when no model exists.
std::optional<Command> singleCommand(const ObservationSet& zc, std::span<const Pose> observerPoses,
                                     const MappingOptions& opt, BaselineState* state = nullptr,
                                     CommandMap map = CommandMap::Calibrated);

/// Rebuilds the model from fresh Z_c and re-issues its command. Called once at
/// the start and again on every region change. nullopt when no model exists;
/// the previous model is kept in that case.
std::optional<Command> multipleUpdates(BaselineState& state, const ObservationSet& zc,
                                       std::span<const Pose> observerPoses,
                                       const MappingOptions& opt,
                                       CommandMap map = CommandMap::Calibrated);

}  // namespace qsrnav
