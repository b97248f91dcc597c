#include "qsrnav/baselines.hpp"

namespace qsrnav {

bool sharesGoalPoint(const starvars::WorldModel& model, int observerCount) {
  const Point g = model.entities.at(slotOf(EntityId::guided(), observerCount)).position();
  const Point goal = model.entities.at(slotOf(EntityId::goal(), observerCount)).position();
  return distance(g, goal) < 1e-9;
}

Command modelCommand(const starvars::WorldModel& model, int observerCount, CommandMap map) {
  const Pose g = model.pose(slotOf(EntityId::guided(), observerCount));
  const Point goal = model.entities.at(slotOf(EntityId::goal(), observerCount)).position();
  if (sharesGoalPoint(model, observerCount)) return Command::TurnLeft;
  return starvars::commandSector(starvars::sectorOf(g, goal, model.m), model.m, map);
}

std::optional<Command> singleCommand(const ObservationSet& zc, std::span<const Pose> observerPoses,
                                     const MappingOptions& opt, BaselineState* state,
                                     CommandMap map) {
  auto model = qpfMapping(zc, observerPoses, opt);
  if (!model) return std::nullopt;
  const Command c = modelCommand(*model, opt.observerCount, map);
  if (state) {
    state->currentModel = std::move(model);
    state->lastSignature = guidedSignature(zc, opt.observerCount);
    ++state->commandsIssued;
    ++state->modelBuilds;
  }
  return c;
}

std::optional<Command> multipleUpdates(BaselineState& state, const ObservationSet& zc,
                                       std::span<const Pose> observerPoses,
                                       const MappingOptions& opt, CommandMap map) {
  auto model = qpfMapping(zc, observerPoses, opt);
  if (!model) return std::nullopt;
  const Command c = modelCommand(*model, opt.observerCount, map);
  state.currentModel = std::move(model);
  state.lastSignature = guidedSignature(zc, opt.observerCount);
  ++state.commandsIssued;
  ++state.modelBuilds;
  return c;
}

}  // namespace qsrnav
