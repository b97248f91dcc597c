#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qsrnav/starvars.hpp"

using namespace qsrnav;
using namespace qsrnav::starvars;

namespace {

// The four-relation example: A(1)B, B(0)A, A(0)C, B(2)C over slots A=0, B=1, C=2.
std::vector<SectorRelation> workedExample() {
  return {SectorRelation::atomic(0, 1, 1, 8), SectorRelation::atomic(1, 0, 0, 8),
          SectorRelation::atomic(0, 0, 2, 8), SectorRelation::atomic(1, 2, 2, 8)};
}

}  // namespace

TEST_SUITE("starvars") {
  TEST_CASE("sectorOf examples") {
    CHECK(sectorOf({0, 0, Angle{}}, {1, 1}, 8).value == 1);
    CHECK(sectorOf({1, 1, Angle::fromDegrees(225)}, {2, 0}, 8).value == 2);
    CHECK(sectorOf({0, 0, Angle{}}, {5, 0}, 8).value == 0);
    CHECK(sectorOf({2, 3, Angle::fromDegrees(30)}, {5, 7}, 8).value == 0);
    CHECK_THROWS_AS(sectorOf({3, 3, Angle{}}, {3, 3}, 8), UndefinedDirection);
  }

  TEST_CASE("sectors tile the circle with closed lower boundaries") {
    const int m = 16;
    const double eta = sectorWidth(m);
    for (int s = 0; s < m; ++s) {
      const double a = s * eta;
      CHECK(sectorOf({0, 0, Angle{}}, {std::cos(a), std::sin(a)}, m).value == s);
      const double mid = a + eta / 2;
      CHECK(sectorOf({0, 0, Angle{}}, {std::cos(mid), std::sin(mid)}, m).value == s);
    }
  }

  TEST_CASE("buildInequalities substitutes the sector lines") {
    const std::vector<SectorRelation> rel{SectorRelation::atomic(0, 1, 1, 8)};
    OrientationAssignment th{Angle{}, Angle{}};
    const auto lp = buildInequalities(rel, th, 2, 8, -1.0);
    REQUIRE(lp.rowCount() == 2);
    const double eta = sectorWidth(8);
    const double s1 = std::sin(eta), c1 = std::cos(eta);
    const double s2 = std::sin(2 * eta), c2 = std::cos(2 * eta);
    const std::vector<double> r0{-s1, c1, s1, -c1};
    const std::vector<double> r1{s2, -c2, -s2, c2};
    for (int j = 0; j < 4; ++j) {
      CHECK(lp.rows[0][j] == doctest::Approx(r0[j]));
      CHECK(lp.rows[1][j] == doctest::Approx(r1[j]));
    }
    CHECK(lp.rhs[0] == 0.0);
    CHECK(lp.rhs[1] == -1.0);

    CHECK(buildInequalities({}, th, 2, 8).rowCount() == 0);
    OrientationAssignment four{Angle{}, Angle::fromDegrees(225), std::nullopt};
    CHECK(buildInequalities(workedExample(), four, 3, 8).rowCount() == 8);
  }

  TEST_CASE("worked example assignment is feasible and its model checks out") {
    OrientationAssignment th{Angle{}, Angle::fromDegrees(225), std::nullopt};
    const auto lp = buildInequalities(workedExample(), th, 3, 8, -1.0);
    const auto r = lp::simplexFeasible(lp);
    REQUIRE(r.feasible());

    // the model A(0,0), B(1,1), C(2,0) scaled up to clear the epsilon margin
    WorldModel hand;
    hand.m = 8;
    hand.entities = {{0, 0, Angle{}}, {10, 10, Angle::fromDegrees(225)}, {20, 0, std::nullopt}};
    for (const auto& rel : workedExample()) CHECK(checkRelation(hand, rel));
    CHECK_FALSE(checkRelation(hand, SectorRelation::atomic(0, 5, 1, 8)));

    ModelSearch s;
    s.entityCount = 3;
    s.m = 8;
    s.oriented = {true, true, true};
    const auto model = searchValidModel(workedExample(), s);
    REQUIRE(model.has_value());
    for (const auto& rel : workedExample()) CHECK(checkRelation(*model, rel));
  }

  TEST_CASE("contradictory relations have no model") {
    const std::vector<SectorRelation> rel{SectorRelation::atomic(0, 0, 1, 8),
                                          SectorRelation::atomic(0, 4, 1, 8)};
    ModelSearch s;
    s.entityCount = 2;
    s.m = 8;
    s.oriented = {true, true};
    s.known = {Angle{}, std::nullopt};
    SearchStats stats;
    CHECK_FALSE(searchValidModel(rel, s, &stats).has_value());
    CHECK(stats.assignmentsTried == 1);

    s.known = {std::nullopt, std::nullopt};
    stats = {};
    CHECK_FALSE(searchValidModel(rel, s, &stats).has_value());
    CHECK(stats.assignmentsTried == 8);
  }

  TEST_CASE("first feasible assignment in lexicographic order is returned") {
    // A(0)B with B at bearing 90 deg is only satisfiable for theta_A = 90 deg
    // when B's position is anchored.
    const std::vector<SectorRelation> rel{SectorRelation::atomic(0, 0, 1, 8)};
    ModelSearch s;
    s.entityCount = 2;
    s.m = 8;
    s.oriented = {true, true};
    s.anchors = {Point{0, 0}, Point{0, 50}};
    SearchStats stats;
    const auto model = searchValidModel(rel, s, &stats);
    REQUIRE(model.has_value());
    CHECK(model->entities[0].theta->degrees() == doctest::Approx(90.0));
    CHECK(stats.assignmentsTried == 3);
    // a non-source oriented entity takes the first value of Theta_m
    CHECK(model->entities[1].theta->radians() == 0.0);
  }

  TEST_CASE("box-bounded models stay in the arena and use region centroids") {
    // single observer at the centre facing east, target in sector 0 of m = 4
    const std::vector<SectorRelation> rel{SectorRelation::atomic(0, 0, 1, 4)};
    ModelSearch s;
    s.entityCount = 2;
    s.m = 4;
    s.oriented = {true, false};
    s.known = {Angle{}, std::nullopt};
    s.anchors = {Point{500, 500}, std::nullopt};
    s.box = Box{0, 0, 1000, 1000};
    const auto model = searchValidModel(rel, s);
    REQUIRE(model.has_value());
    // quadrant y >= 500 and, past the epsilon strip, x >= 501
    CHECK(model->entities[1].x == doctest::Approx(750.5).epsilon(1e-9));
    CHECK(model->entities[1].y == doctest::Approx(750.0).epsilon(1e-9));
    CHECK(checkRelation(*model, rel[0]));
  }

  TEST_CASE("relation from an entity to itself is undefined") {
    WorldModel model;
    model.m = 8;
    model.entities = {{0, 0, Angle{}}};
    CHECK_THROWS_AS(checkRelation(model, {0, 0, 1, 2}), UndefinedDirection);
  }

  TEST_CASE("command sector ranges") {
    CHECK(commandRange(Command::TurnLeft, 8) == std::pair{1, 3});
    CHECK(commandRange(Command::MoveBackward, 8) == std::pair{3, 5});
    CHECK(commandRange(Command::TurnRight, 8) == std::pair{5, 7});
    CHECK(commandRange(Command::MoveForward, 8) == std::pair{7, 1});
    CHECK(commandRange(Command::TurnLeft, 16) == std::pair{2, 6});

    CHECK(commandRange(Command::TurnLeft, 8, CommandMap::Literal) == std::pair{1, 3});
    CHECK(commandRange(Command::TurnRight, 8, CommandMap::Literal) == std::pair{3, 5});
    CHECK(commandRange(Command::MoveForward, 8, CommandMap::Literal) == std::pair{5, 7});
    CHECK(commandRange(Command::MoveBackward, 8, CommandMap::Literal) == std::pair{7, 1});

    CHECK(commandSector(SectorIndex{0}, 8) == Command::MoveForward);
    CHECK(commandSector(SectorIndex{0}, 8, CommandMap::Literal) == Command::MoveBackward);
    CHECK(commandSector(SectorIndex{2}, 8) == Command::TurnLeft);
    CHECK(commandSector(SectorIndex{4}, 8) == Command::MoveBackward);
    CHECK(commandSector(SectorIndex{6}, 8) == Command::TurnRight);
    CHECK(commandSector(SectorIndex{31}, 32) == Command::MoveForward);
    CHECK_THROWS_AS(commandSector(SectorIndex{0}, 12), std::invalid_argument);

    // every sector gets exactly one command
    for (int m : {8, 16, 32}) {
      int counts[5] = {0, 0, 0, 0, 0};
      for (int s = 0; s < m; ++s) ++counts[static_cast<int>(commandSector(SectorIndex{s}, m))];
      CHECK(counts[0] == 0);
      for (int c = 1; c < 5; ++c) CHECK(counts[c] == m / 4);
    }
  }

  TEST_CASE("relation files parse names, headings and comments") {
    const auto f = parseRelationFile(
        "# worked example\n"
        "m = 8\n"
        "A (1) B\n"
        "B (0) A   # back again\n"
        "A (0) C\n"
        "B (2) C\n"
        "theta A = 0\n");
    CHECK(f.m == 8);
    REQUIRE(f.names.size() == 3);
    CHECK(f.relations.size() == 4);
    CHECK(f.relations[3] == SectorRelation::atomic(1, 2, 2, 8));
    CHECK(f.thetaDeg.at("A") == 0.0);
    CHECK_THROWS(parseRelationFile("A -> B\n"));
    CHECK_THROWS(parseRelationFile("A (9) B\n"));
  }
}
