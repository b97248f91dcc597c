#pragma once

// The Star_m / StarVars_m direction calculus: sectors, the linear inequality
// encoding of sector relations, world-model search, and the sector-to-command
// map of the agent model.

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsrnav/core.hpp"
#include "qsrnav/scenario.hpp"
#include "qsrnav/simplex.hpp"

namespace qsrnav::starvars {

/// Direction between coincident points.
class UndefinedDirection : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The LP solver broke down; distinct from a clean "no model" verdict.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Angular width of one sector, 2pi/m.
inline double sectorWidth(int m) { return kTwoPi / m; }

/// Sector of `observer`'s egocentric frame containing `target`. Sector s spans
/// relative angles [s*eta, (s+1)*eta) counter-clockwise from the heading.
SectorIndex sectorOf(const Pose& observer, Point target, int m);

/// Same, for an already-computed relative bearing in [0, 2pi).
SectorIndex sectorOfBearing(Angle relativeBearing, int m);

/// source [lower, upper[ target, indices mod m. Atomic when upper = lower + 1.
struct SectorRelation {
  int source = 0;  // entity slot
  int target = 0;
  int lower = 0;
  int upper = 1;

  static SectorRelation atomic(int source, int sector, int target, int m) {
    return {source, target, sector, (sector + 1) % m};
  }
  bool operator==(const SectorRelation&) const = default;
};

/// Per-slot heading; empty for unknown or unoriented entities.
using OrientationAssignment = std::vector<std::optional<Angle>>;

/// Columns are (x_0, y_0, x_1, y_1, ...): slot k owns columns 2k and 2k+1.
inline int xColumn(int slot) { return 2 * slot; }
inline int yColumn(int slot) { return 2 * slot + 1; }

/// Two rows per relation: "on or left of line c" with rhs 0 and "right of line
/// d" with rhs epsilon (the strict side made non-strict).
lp::LinearProgram buildInequalities(std::span<const SectorRelation> relations,
                                    const OrientationAssignment& assignment, int entityCount,
                                    int m, double epsilon = -1.0);

struct ModelEntity {
  double x = 0.0;
  double y = 0.0;
  std::optional<Angle> theta;

  Point position() const { return {x, y}; }
};

struct WorldModel {
  int m = 8;
  std::vector<ModelEntity> entities;  // indexed by slot

  Pose pose(int slot) const;
};

struct Box {
  double xMin = 0.0, yMin = 0.0, xMax = 1000.0, yMax = 1000.0;
};

struct ModelSearch {
  int entityCount = 0;
  int m = 8;
  std::vector<bool> oriented;            // slots that carry a heading
  OrientationAssignment known;           // fixed headings, by slot
  std::vector<std::optional<Point>> anchors;  // fixed positions, by slot
  std::optional<Box> box;
  double epsilon = -1.0;
  /// Report a central feasible point instead of the phase-1 vertex: the
  /// centroid of each entity's region when the rows do not couple entities
  /// and a box bounds them, otherwise the mean of the axis-extreme points.
  bool centre = true;
};

struct SearchStats {
  long assignmentsTried = 0;
  long lpSolves = 0;
};

/// Enumerates completions of unknown source headings over Theta_m
/// (declaration order, ascending) and returns the model of the first feasible
/// assignment, or nullopt when none is feasible. Oriented entities that are
/// never a relation source take the first value of Theta_m when unknown.
/// Throws NumericalFailure if the LP solver breaks down.
std::optional<WorldModel> searchValidModel(std::span<const SectorRelation> relations,
                                           const ModelSearch& search,
                                           SearchStats* stats = nullptr);

/// True iff the target lies in [lower, upper[ of the source's frame in `model`.
bool checkRelation(const WorldModel& model, const SectorRelation& r);

/// True iff sector s lies in the cyclic half-open range [lower, upper[.
bool inRange(int s, int lower, int upper, int m);

/// Half-open sector range assigned to a command under the given map.
std::pair<int, int> commandRange(Command c, int m, CommandMap map = CommandMap::Calibrated);

/// Maps the goal's sector to one of the four motion commands. Requires m % 8 == 0.
Command commandSector(SectorIndex s, int m, CommandMap map = CommandMap::Calibrated);

/// Parsed form of the relation text format used by `qsrnav check-model`.
struct RelationFile {
  int m = 8;
  std::vector<std::string> names;  // slot -> name, declaration order
  std::vector<SectorRelation> relations;
  std::map<std::string, double> thetaDeg;  // known headings

  int slot(const std::string& name) const;
};

/// Lines: `A (1) B`, `theta A = 90`, `m = 8`; `#` starts a comment.
RelationFile parseRelationFile(const std::string& text);

}  // namespace qsrnav::starvars
