#include "qsrnav/core.hpp"

#include <algorithm>

namespace qsrnav {

Angle Angle::fromRadians(double raw) { return normalizeAngle(raw); }

Angle normalizeAngle(double raw) {
  if (!std::isfinite(raw)) throw std::domain_error("normalizeAngle: non-finite input");
  double v = std::fmod(raw, kTwoPi);
  if (v < 0.0) v += kTwoPi;
  // fmod of a tiny negative value can round back up to exactly 2pi
  if (v >= kTwoPi) v = 0.0;
  return Angle(v);
}

double angleDiff(double a, double b) {
  double d = std::fmod(a - b, kTwoPi);
  if (d <= -std::numbers::pi) d += kTwoPi;
  if (d > std::numbers::pi) d -= kTwoPi;
  return d;
}

std::string toString(EntityId id) {
  switch (id.kind) {
    case EntityKind::Coordinator: return "coordinator";
    case EntityKind::Observer: return "observer" + std::to_string(id.index);
    case EntityKind::Guided: return "guided";
    case EntityKind::Goal: return "goal";
  }
  return "?";
}

int slotOf(EntityId id, int observerCount) {
  switch (id.kind) {
    case EntityKind::Coordinator:
    case EntityKind::Observer: return id.index;
    case EntityKind::Guided: return observerCount;
    case EntityKind::Goal: return observerCount + 1;
  }
  return -1;
}

EntityId entityAtSlot(int slot, int observerCount) {
  if (slot < 0 || slot > observerCount + 1) throw std::out_of_range("entityAtSlot: bad slot");
  if (slot < observerCount) return EntityId::observer(slot);
  return slot == observerCount ? EntityId::guided() : EntityId::goal();
}

std::string colourLabel(EntityId id) {
  static const char* observerColours[] = {"red", "blue", "magenta", "cyan", "green", "orange"};
  switch (id.kind) {
    case EntityKind::Coordinator:
    case EntityKind::Observer: return observerColours[id.index % 6];
    case EntityKind::Guided: return "yellow";
    case EntityKind::Goal: return "white";
  }
  return "black";
}

std::string toString(Command c) {
  switch (c) {
    case Command::Stop: return "Stop";
    case Command::MoveForward: return "MoveForward";
    case Command::TurnRight: return "TurnRight";
    case Command::TurnLeft: return "TurnLeft";
    case Command::MoveBackward: return "MoveBackward";
  }
  return "?";
}

Command commandFromString(const std::string& s) {
  for (auto c : {Command::Stop, Command::MoveForward, Command::TurnRight, Command::TurnLeft,
                 Command::MoveBackward})
    if (toString(c) == s) return c;
  throw std::invalid_argument("unknown command: " + s);
}

std::string toString(Method m) {
  switch (m) {
    case Method::SingleCommand: return "single_command";
    case Method::MultipleUpdates: return "multiple_updates";
    case Method::QPF: return "qpf";
    case Method::PFQC: return "pfqc";
  }
  return "?";
}

Method methodFromString(const std::string& s) {
  for (auto m : {Method::SingleCommand, Method::MultipleUpdates, Method::QPF, Method::PFQC})
    if (toString(m) == s) return m;
  throw std::invalid_argument("unknown method: " + s);
}

void ObservationSet::insert(ObservationTuple t) {
  if (t.observer == t.target) throw std::invalid_argument("observation of an entity by itself");
  auto it = std::find_if(tuples_.begin(), tuples_.end(), [&](const ObservationTuple& o) {
    return o.observer == t.observer && o.target == t.target;
  });
  if (it != tuples_.end())
    *it = std::move(t);
  else
    tuples_.push_back(std::move(t));
}

const ObservationTuple* ObservationSet::find(EntityId observer, EntityId target) const {
  for (const auto& t : tuples_)
    if (t.observer == observer && t.target == target) return &t;
  return nullptr;
}

Rng::Rng(std::uint64_t seed, std::uint64_t streamId) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(streamId),
                    static_cast<std::uint32_t>(streamId >> 32), 0x9e3779b9u};
  engine_.seed(seq);
}

double Rng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::gaussian(double mean, double stddev) {
  if (stddev <= 0.0) return mean;
  return std::normal_distribution<double>(mean, stddev)(engine_);
}

int Rng::uniformInt(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

}  // namespace qsrnav
