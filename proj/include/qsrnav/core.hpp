#pragma once

// Shared domain types: angles, poses, entity identities, commands and the
// coordinator's observation records.

#include <cmath>
#include <compare>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qsrnav {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double degToRad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double radToDeg(double rad) { return rad * 180.0 / std::numbers::pi; }

class Angle;
/// Maps any finite angle into [0, 2pi). Throws std::domain_error on NaN/inf.
Angle normalizeAngle(double raw);

/// Planar direction in radians, always held in [0, 2pi).
class Angle {
 public:
  constexpr Angle() = default;

  static Angle fromRadians(double raw);
  static Angle fromDegrees(double deg) { return fromRadians(degToRad(deg)); }

  constexpr double radians() const { return value_; }
  double degrees() const { return radToDeg(value_); }

  Angle operator+(Angle o) const { return fromRadians(value_ + o.value_); }
  Angle operator-(Angle o) const { return fromRadians(value_ - o.value_); }

  constexpr auto operator<=>(const Angle&) const = default;

 private:
  friend Angle normalizeAngle(double raw);
  explicit constexpr Angle(double normalized) : value_(normalized) {}

  double value_ = 0.0;
};

/// Signed smallest difference a - b, in (-pi, pi].
double angleDiff(double a, double b);

struct Point {
  double x = 0.0;
  double y = 0.0;
  constexpr auto operator<=>(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Pose {
  double x = 0.0;  // cm
  double y = 0.0;  // cm
  Angle theta;

  Point position() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

enum class EntityKind { Observer, Coordinator, Guided, Goal };

/// Identity of a spatial entity. Observers carry their index; the coordinator
/// is observer 0.
struct EntityId {
  EntityKind kind = EntityKind::Observer;
  int index = 0;

  static EntityId observer(int i) {
    return {i == 0 ? EntityKind::Coordinator : EntityKind::Observer, i};
  }
  static EntityId guided() { return {EntityKind::Guided, 0}; }
  static EntityId goal() { return {EntityKind::Goal, 0}; }

  bool isObserver() const {
    return kind == EntityKind::Observer || kind == EntityKind::Coordinator;
  }
  auto operator<=>(const EntityId&) const = default;
};

std::string toString(EntityId id);

/// Dense slot numbering used by the StarVars layer and world models:
/// observers 0..n_o-1, then guided, then goal.
int slotOf(EntityId id, int observerCount);
EntityId entityAtSlot(int slot, int observerCount);

/// Colour used when rendering or reporting an entity.
std::string colourLabel(EntityId id);

enum class Command { Stop, MoveForward, TurnRight, TurnLeft, MoveBackward };

std::string toString(Command c);
Command commandFromString(const std::string& s);

enum class Method { SingleCommand, MultipleUpdates, QPF, PFQC };

std::string toString(Method m);
Method methodFromString(const std::string& s);

/// Sector index in [0, m).
struct SectorIndex {
  int value = 0;
  auto operator<=>(const SectorIndex&) const = default;
};

/// z_ij: either a qualitative sector (QPF, baselines) or a relative bearing (PFQC).
using Measurement = std::variant<SectorIndex, Angle>;

struct ObservationTuple {
  EntityId observer;
  Measurement measurement;
  EntityId target;
  Angle observerHeading;
};

/// The coordinator's bag of observations, Z_c. At most one tuple per
/// (observer, target) pair; inserting a duplicate replaces the old tuple.
class ObservationSet {
 public:
  void insert(ObservationTuple t);
  const ObservationTuple* find(EntityId observer, EntityId target) const;
  const std::vector<ObservationTuple>& tuples() const { return tuples_; }
  std::size_t size() const { return tuples_.size(); }

  std::optional<Angle> guidedHeading;

 private:
  std::vector<ObservationTuple> tuples_;
};

/// Deterministic random stream keyed by (seed, streamId). Identical keys give
/// bit-identical draws; different stream ids give independent sequences.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t streamId);

  double uniform(double lo, double hi);
  double gaussian(double mean, double stddev);
  int uniformInt(int lo, int hi);  // inclusive bounds
  std::uint64_t next() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline Rng seededRng(std::uint64_t seed, std::uint64_t streamId) { return Rng(seed, streamId); }

}  // namespace qsrnav
