#include "qsrnav/starvars.hpp"


#include <algorithm>
#include <array>
#include <cmath>
#include <regex>
#include <sstream>

namespace qsrnav::starvars {

SectorIndex sectorOfBearing(Angle relativeBearing, int m) {
  if (m < 2) throw std::invalid_argument("sectorOf: m must be >= 2");
  const double q = relativeBearing.radians() / sectorWidth(m);
  int s = static_cast<int>(std::floor(q));
  // a bearing a hair below the line s*eta after rounding still belongs to s
  if (q - s > 1.0 - 1e-9) ++s;
  return {((s % m) + m) % m};
}

SectorIndex sectorOf(const Pose& observer, Point target, int m) {
  const double dx = target.x - observer.x;
  const double dy = target.y - observer.y;
  if (std::hypot(dx, dy) < 1e-9) throw UndefinedDirection("sectorOf: coincident points");
  return sectorOfBearing(normalizeAngle(std::atan2(dy, dx) - observer.theta.radians()), m);
}

lp::LinearProgram buildInequalities(std::span<const SectorRelation> relations,
                                    const OrientationAssignment& assignment, int entityCount,
                                    int m, double epsilon) {
  lp::LinearProgram prog;
  prog.variableCount = 2 * entityCount;
  const double eta = sectorWidth(m);
  for (const auto& r : relations) {
    if (r.source < 0 || r.source >= entityCount || r.target < 0 || r.target >= entityCount)
      throw std::out_of_range("buildInequalities: relation references an unknown entity");
    if (r.source == r.target) throw UndefinedDirection("buildInequalities: source equals target");
    if (r.source >= static_cast<int>(assignment.size()) || !assignment[r.source])
      throw std::invalid_argument("buildInequalities: relation source has no orientation");
    const double theta = assignment[r.source]->radians();
    const double a = r.lower * eta + theta;
    const double b = r.upper * eta + theta;
    const int x1 = xColumn(r.source), y1 = yColumn(r.source);
    const int x2 = xColumn(r.target), y2 = yColumn(r.target);

    std::vector<double> row1(prog.variableCount, 0.0);
    row1[x1] = -std::sin(a);
    row1[x2] = std::sin(a);
    row1[y1] = std::cos(a);
    row1[y2] = -std::cos(a);
    prog.addRow(std::move(row1), 0.0);

    std::vector<double> row2(prog.variableCount, 0.0);
    row2[x1] = std::sin(b);
    row2[x2] = -std::sin(b);
    row2[y1] = -std::cos(b);
    row2[y2] = std::cos(b);
    prog.addRow(std::move(row2), epsilon);
  }
  return prog;
}

Pose WorldModel::pose(int slot) const {
  const auto& e = entities.at(slot);
  return {e.x, e.y, e.theta.value_or(Angle{})};
}

namespace {

// The program restricted to non-anchored columns, with anchored positions
// folded into the right-hand side.
struct ReducedProgram {
  lp::LinearProgram lp;
  std::vector<int> freeSlots;
  bool triviallyInfeasible = false;
};

ReducedProgram reduce(const lp::LinearProgram& full, const ModelSearch& s) {
  ReducedProgram out;
  std::vector<int> columnMap(full.variableCount, -1);
  for (int slot = 0; slot < s.entityCount; ++slot) {
    const bool anchored = slot < static_cast<int>(s.anchors.size()) && s.anchors[slot];
    if (anchored) continue;
    columnMap[xColumn(slot)] = 2 * static_cast<int>(out.freeSlots.size());
    columnMap[yColumn(slot)] = 2 * static_cast<int>(out.freeSlots.size()) + 1;
    out.freeSlots.push_back(slot);
  }
  out.lp.variableCount = 2 * static_cast<int>(out.freeSlots.size());

  for (std::size_t i = 0; i < full.rowCount(); ++i) {
    std::vector<double> row(out.lp.variableCount, 0.0);
    double rhs = full.rhs[i];
    bool any = false;
    for (int j = 0; j < full.variableCount; ++j) {
      const double c = full.rows[i][j];
      if (c == 0.0) continue;
      if (columnMap[j] >= 0) {
        row[columnMap[j]] = c;
        any = true;
      } else {
        const Point& p = *s.anchors[j / 2];
        rhs -= c * (j % 2 == 0 ? p.x : p.y);
      }
    }
    if (!any) {
      // Every entity of the row is anchored, so the strict side can be
      // tested exactly instead of through the epsilon margin.
      const double lhs = full.rhs[i] - rhs;
      const bool holds = full.rhs[i] < 0.0 ? lhs < 0.0 : lhs <= lp::kRowTolerance;
      if (!holds) {
        out.triviallyInfeasible = true;
        return out;
      }
      continue;
    }
    out.lp.addRow(std::move(row), rhs);
  }

  if (s.box) {
    for (std::size_t k = 0; k < out.freeSlots.size(); ++k) {
      for (int axis = 0; axis < 2; ++axis) {
        const double lo = axis == 0 ? s.box->xMin : s.box->yMin;
        const double hi = axis == 0 ? s.box->xMax : s.box->yMax;
        std::vector<double> up(out.lp.variableCount, 0.0), down(out.lp.variableCount, 0.0);
        up[2 * k + axis] = 1.0;
        down[2 * k + axis] = -1.0;
        out.lp.addRow(std::move(up), hi);
        out.lp.addRow(std::move(down), -lo);
      }
    }
  }
  return out;
}

// Centroid of the polygon {q in box : a q <= b for every half-plane},
// or nullopt when the clipped polygon has no area.
std::optional<Point> clippedCentroid(const Box& box,
                                     const std::vector<std::array<double, 3>>& halfPlanes) {
  std::vector<Point> poly{{box.xMin, box.yMin}, {box.xMax, box.yMin},
                          {box.xMax, box.yMax}, {box.xMin, box.yMax}};
  for (const auto& [a, b, c] : halfPlanes) {
    std::vector<Point> next;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p = poly[i];
      const Point& q = poly[(i + 1) % n];
      const double fp = a * p.x + b * p.y - c;
      const double fq = a * q.x + b * q.y - c;
      if (fp <= 0.0) next.push_back(p);
      if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
        const double t = fp / (fp - fq);
        next.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
      }
    }
    poly = std::move(next);
    if (poly.size() < 3) return std::nullopt;
  }
  double area = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % poly.size()];
    const double cross = p.x * q.y - q.x * p.y;
    area += cross;
    cx += (p.x + q.x) * cross;
    cy += (p.y + q.y) * cross;
  }
  if (std::fabs(area) < 1e-9) return std::nullopt;
  return Point{cx / (3.0 * area), cy / (3.0 * area)};
}

// When every row constrains a single free entity, each entity's feasible set
// is its own polygon and the centroid of that polygon is the natural point
// estimate. Returns nullopt when the rows couple entities.
std::optional<std::vector<double>> regionCentroids(const ReducedProgram& rp, const Box& box) {
  const std::size_t k = rp.freeSlots.size();
  std::vector<std::vector<std::array<double, 3>>> planes(k);
  for (std::size_t i = 0; i < rp.lp.rowCount(); ++i) {
    const auto& row = rp.lp.rows[i];
    int owner = -1;
    for (int j = 0; j < rp.lp.variableCount; ++j) {
      if (row[j] == 0.0) continue;
      if (owner >= 0 && owner != j / 2) return std::nullopt;
      owner = j / 2;
    }
    if (owner < 0) continue;
    planes[owner].push_back({row[2 * owner], row[2 * owner + 1], rp.lp.rhs[i]});
  }
  std::vector<double> out(rp.lp.variableCount, 0.0);
  for (std::size_t e = 0; e < k; ++e) {
    const auto c = clippedCentroid(box, planes[e]);
    if (!c) return std::nullopt;
    out[2 * e] = c->x;
    out[2 * e + 1] = c->y;
  }
  return out;
}

// Mean of the axis-extreme feasible points.
std::vector<double> extremeMean(const ReducedProgram& rp, const std::vector<double>& vertex,
                                SearchStats* stats) {
  std::vector<std::vector<double>> objectives;
  for (int c = 0; c < rp.lp.variableCount; ++c) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> obj(rp.lp.variableCount, 0.0);
      obj[c] = sign;
      objectives.push_back(std::move(obj));
    }
  }
  auto results = lp::simplexMinimizeMany(rp.lp, objectives);
  if (stats) stats->lpSolves += static_cast<long>(objectives.size());
  std::vector<double> sum(rp.lp.variableCount, 0.0);
  int used = 0;
  for (const auto& r : results) {
    if (!r.feasible()) continue;
    for (int j = 0; j < rp.lp.variableCount; ++j) sum[j] += r.point[j];
    ++used;
  }
  if (used == 0) return vertex;
  for (double& v : sum) v /= used;
  return rp.lp.maxViolation(sum) <= lp::kRowTolerance ? sum : vertex;
}

std::vector<double> centredPoint(const ReducedProgram& rp, const std::vector<double>& vertex,
                                 const std::optional<Box>& box, SearchStats* stats) {
  if (box) {
    if (auto c = regionCentroids(rp, *box); c && rp.lp.maxViolation(*c) <= lp::kRowTolerance)
      return *c;
  }
  return extremeMean(rp, vertex, stats);
}

}  // namespace

std::optional<WorldModel> searchValidModel(std::span<const SectorRelation> relations,
                                           const ModelSearch& s, SearchStats* stats) {
  const int n = s.entityCount;
  if (static_cast<int>(s.oriented.size()) != n)
    throw std::invalid_argument("searchValidModel: oriented flags must cover every entity");
  std::vector<bool> isSource(n, false);
  for (const auto& r : relations) {
    if (r.source < 0 || r.source >= n || r.target < 0 || r.target >= n)
      throw std::out_of_range("searchValidModel: relation references an unknown entity");
    if (!s.oriented[r.source])
      throw std::invalid_argument("searchValidModel: unoriented entity used as relation source");
    isSource[r.source] = true;
  }

  auto knownAt = [&](int slot) -> std::optional<Angle> {
    return slot < static_cast<int>(s.known.size()) ? s.known[slot] : std::nullopt;
  };

  std::vector<int> unknownSources;
  for (int slot = 0; slot < n; ++slot)
    if (isSource[slot] && !knownAt(slot)) unknownSources.push_back(slot);

  const double eta = sectorWidth(s.m);
  std::vector<int> digits(unknownSources.size(), 0);
  OrientationAssignment assignment(n);
  for (int slot = 0; slot < n; ++slot) {
    if (knownAt(slot))
      assignment[slot] = knownAt(slot);
    else if (s.oriented[slot])
      assignment[slot] = Angle{};  // first value of Theta_m
  }

  while (true) {
    for (std::size_t k = 0; k < unknownSources.size(); ++k)
      assignment[unknownSources[k]] = Angle::fromRadians(digits[k] * eta);
    if (stats) ++stats->assignmentsTried;

    auto full = buildInequalities(relations, assignment, n, s.m, s.epsilon);
    auto rp = reduce(full, s);
    if (!rp.triviallyInfeasible) {
      auto res = lp::simplexFeasible(rp.lp);
      if (stats) ++stats->lpSolves;
      if (res.status == lp::LpStatus::NumericalFailure || res.status == lp::LpStatus::Unbounded)
        throw NumericalFailure("searchValidModel: LP solver failure");
      if (res.feasible()) {
        std::vector<double> point = s.centre ? centredPoint(rp, res.point, s.box, stats) : res.point;
        WorldModel model;
        model.m = s.m;
        model.entities.resize(n);
        for (int slot = 0; slot < n; ++slot) {
          if (slot < static_cast<int>(s.anchors.size()) && s.anchors[slot]) {
            model.entities[slot].x = s.anchors[slot]->x;
            model.entities[slot].y = s.anchors[slot]->y;
          }
          model.entities[slot].theta = assignment[slot];
        }
        for (std::size_t k = 0; k < rp.freeSlots.size(); ++k) {
          model.entities[rp.freeSlots[k]].x = point[2 * k];
          model.entities[rp.freeSlots[k]].y = point[2 * k + 1];
        }
        return model;
      }
    }

    // odometer, last unknown source varies fastest
    int k = static_cast<int>(digits.size()) - 1;
    while (k >= 0 && ++digits[k] == s.m) digits[k--] = 0;
    if (k < 0) return std::nullopt;
  }
}

bool inRange(int s, int lower, int upper, int m) {
  const int width = ((upper - lower) % m + m) % m;
  const int offset = ((s - lower) % m + m) % m;
  return offset < (width == 0 ? m : width);
}

bool checkRelation(const WorldModel& model, const SectorRelation& r) {
  const int n = static_cast<int>(model.entities.size());
  if (r.source < 0 || r.source >= n || r.target < 0 || r.target >= n)
    throw std::out_of_range("checkRelation: entity missing from model");
  if (r.source == r.target) throw UndefinedDirection("checkRelation: source equals target");
  const auto& src = model.entities[r.source];
  if (!src.theta) throw std::invalid_argument("checkRelation: source has no orientation");
  const auto s = sectorOf(model.pose(r.source), model.entities[r.target].position(), model.m);
  return inRange(s.value, r.lower, r.upper, model.m);
}

std::pair<int, int> commandRange(Command c, int m, CommandMap map) {
  if (m <= 0 || m % 8 != 0) throw std::invalid_argument("commandSector: m must be divisible by 8");
  const int e = m / 8;
  // Ranges in the printed order Left, Right, Forward, Backward.
  const std::pair<int, int> ranges[4] = {{e, 3 * e}, {3 * e, 5 * e}, {5 * e, 7 * e}, {7 * e, e}};
  if (map == CommandMap::Literal) {
    switch (c) {
      case Command::TurnLeft: return ranges[0];
      case Command::TurnRight: return ranges[1];
      case Command::MoveForward: return ranges[2];
      case Command::MoveBackward: return ranges[3];
      default: break;
    }
  } else {
    // Sectors count counter-clockwise from the heading, so the range holding
    // sector 0 is ahead and the one opposite it is behind.
    switch (c) {
      case Command::TurnLeft: return ranges[0];
      case Command::MoveBackward: return ranges[1];
      case Command::TurnRight: return ranges[2];
      case Command::MoveForward: return ranges[3];
      default: break;
    }
  }
  throw std::invalid_argument("commandRange: Stop has no sector range");
}

Command commandSector(SectorIndex s, int m, CommandMap map) {
  if (s.value < 0 || s.value >= m) throw std::out_of_range("commandSector: sector out of range");
  for (auto c : {Command::MoveForward, Command::TurnLeft, Command::TurnRight, Command::MoveBackward}) {
    auto [lo, hi] = commandRange(c, m, map);
    if (inRange(s.value, lo, hi, m)) return c;
  }
  throw std::logic_error("commandSector: ranges do not tile the circle");
}

int RelationFile::slot(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("unknown entity: " + name);
  return static_cast<int>(it - names.begin());
}

RelationFile parseRelationFile(const std::string& text) {
  static const std::regex relRe(R"(^\s*([A-Za-z_]\w*)\s*\(\s*(\d+)\s*\)\s*([A-Za-z_]\w*)\s*$)");
  static const std::regex thetaRe(R"(^\s*theta\s+([A-Za-z_]\w*)\s*=\s*(-?[0-9]*\.?[0-9]+)\s*$)");
  static const std::regex mRe(R"(^\s*m\s*=\s*(\d+)\s*$)");

  RelationFile f;
  struct Pending { std::string a; int s; std::string b; };
  std::vector<Pending> pending;
  auto intern = [&](const std::string& name) {
    if (std::find(f.names.begin(), f.names.end(), name) == f.names.end()) f.names.push_back(name);
  };

  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch mt;
    if (std::regex_match(line, mt, mRe)) {
      f.m = std::stoi(mt[1]);
    } else if (std::regex_match(line, mt, thetaRe)) {
      intern(mt[1]);
      f.thetaDeg[mt[1]] = std::stod(mt[2]);
    } else if (std::regex_match(line, mt, relRe)) {
      intern(mt[1]);
      intern(mt[3]);
      pending.push_back({mt[1], std::stoi(mt[2]), mt[3]});
    } else {
      throw std::invalid_argument("relation file line " + std::to_string(lineNo) +
                                  ": cannot parse '" + line + "'");
    }
  }
  if (f.m < 2) throw std::invalid_argument("relation file: m must be >= 2");
  for (const auto& p : pending) {
    if (p.s >= f.m) throw std::invalid_argument("relation file: sector index >= m");
    if (p.a == p.b) throw std::invalid_argument("relation file: relation of an entity to itself");
    f.relations.push_back(SectorRelation::atomic(f.slot(p.a), p.s, f.slot(p.b), f.m));
  }
  return f;
}

}  // namespace qsrnav::starvars
