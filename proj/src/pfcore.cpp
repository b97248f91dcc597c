#include "qsrnav/pfcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "qsrnav/simkernel.hpp"

namespace qsrnav {

ReleaseConfig ReleaseConfig::from(const ScenarioConfig& cfg, std::optional<Angle> guidedHeading) {
  ReleaseConfig r;
  r.particleCount = cfg.filter.particleCount;
  r.positionSigma = cfg.filter.releasePositionSigma;
  r.headingSigma = degToRad(cfg.filter.releaseHeadingSigmaDeg);
  r.m = cfg.m;
  r.guidedHeading = guidedHeading;
  r.bounds = starvars::Box{0.0, 0.0, cfg.arenaWidth, cfg.arenaHeight};
  return r;
}

ParticleSet releaseParticles(const starvars::WorldModel& model, int observerCount,
                             const ReleaseConfig& cfg, Rng& rng) {
  const int guidedSlot = slotOf(EntityId::guided(), observerCount);
  const int goalSlot = slotOf(EntityId::goal(), observerCount);
  if (static_cast<int>(model.entities.size()) <= goalSlot)
    throw std::invalid_argument("releaseParticles: model is missing entities");
  if (cfg.particleCount < 1) throw std::invalid_argument("releaseParticles: N must be >= 1");

  ParticleSet s;
  for (int i = 0; i < observerCount; ++i) s.observers.push_back({model.pose(i), 1.0});

  const auto& g = model.entities[guidedSlot];
  const double w = 1.0 / cfg.particleCount;
  const double eta = starvars::sectorWidth(cfg.m);
  s.guided.reserve(cfg.particleCount);
  for (int k = 0; k < cfg.particleCount; ++k) {
    Pose p;
    p.x = rng.gaussian(g.x, cfg.positionSigma);
    p.y = rng.gaussian(g.y, cfg.positionSigma);
    if (cfg.bounds) {
      p.x = std::clamp(p.x, cfg.bounds->xMin, cfg.bounds->xMax);
      p.y = std::clamp(p.y, cfg.bounds->yMin, cfg.bounds->yMax);
    }
    if (cfg.guidedHeading)
      p.theta = Angle::fromRadians(rng.gaussian(cfg.guidedHeading->radians(), cfg.headingSigma));
    else
      p.theta = Angle::fromRadians(rng.uniformInt(0, cfg.m - 1) * eta);
    s.guided.push_back({p, w});
  }
  s.goal.push_back(model.entities[goalSlot].position());
  return s;
}

Particle predictSample(Particle p, Command action, double rotationSigma, Rng& rng,
                       const TranslationModel& translate) {
  if (action == Command::Stop) throw std::invalid_argument("predictSample: Stop is not a motion");
  if (action != Command::MoveForward)
    p.pose.theta = Angle::fromRadians(p.pose.theta.radians() + commandTurn(action) +
                                      rng.gaussian(0.0, rotationSigma));
  if (translate) translate(p.pose, rng);
  return p;
}

void normalizeWeights(std::vector<Particle>& particles) {
  double total = 0.0;
  for (const auto& p : particles) {
    if (!(p.weight >= 0.0) || !std::isfinite(p.weight))
      throw DegenerateFilter("particle weight is negative or not finite");
    total += p.weight;
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw DegenerateFilter("all particle weights are zero");
  for (auto& p : particles) p.weight /= total;
}

std::vector<Particle> resample(std::span<const Particle> particles, Rng& rng,
                               ResamplingScheme scheme) {
  const std::size_t n = particles.size();
  if (n == 0) throw DegenerateFilter("resample: empty particle set");
  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = particles[i].weight;
    if (!(w >= 0.0) || !std::isfinite(w)) throw DegenerateFilter("resample: invalid weight");
    total += w;
    cumulative[i] = total;
  }
  if (!(total > 0.0)) throw DegenerateFilter("resample: all weights are zero");

  auto pick = [&](double u) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t idx = std::min<std::size_t>(it - cumulative.begin(), n - 1);
    // skip zero-weight entries that share the cumulative value
    while (particles[idx].weight == 0.0 && idx + 1 < n) ++idx;
    return idx;
  };

  std::vector<Particle> out;
  out.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  if (scheme == ResamplingScheme::LowVariance) {
    const double step = total / static_cast<double>(n);
    const double start = rng.uniform(0.0, step);
    for (std::size_t k = 0; k < n; ++k) out.push_back({particles[pick(start + k * step)].pose, w});
  } else {
    for (std::size_t k = 0; k < n; ++k) out.push_back({particles[pick(rng.uniform(0.0, total))].pose, w});
  }
  return out;
}

Command chooseAction(const ParticleSet& particles, int m, bool stopPerceived, CommandMap map) {
  if (stopPerceived) return Command::Stop;
  if (particles.guided.empty() || particles.goal.empty())
    throw std::invalid_argument("chooseAction: needs guided and goal particles");

  // vote order doubles as the tie-break order
  constexpr std::array<Command, 4> order = {Command::MoveForward, Command::TurnLeft,
                                            Command::TurnRight, Command::MoveBackward};
  std::array<long, 4> votes{};
  const Point goal = particles.goal.front();
  for (const auto& p : particles.guided) {
    if (distance(p.pose.position(), goal) < 1e-9) continue;
    const Command c = starvars::commandSector(starvars::sectorOf(p.pose, goal, m), m, map);
    for (std::size_t k = 0; k < order.size(); ++k)
      if (order[k] == c) ++votes[k];
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < order.size(); ++k)
    if (votes[k] > votes[best]) best = k;
  return order[best];
}

}  // namespace qsrnav
