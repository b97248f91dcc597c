#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qsrnav/qpf.hpp"

using namespace qsrnav;

namespace {

const std::vector<Pose> kObservers{{200, 200, Angle{}},
                                   {800, 300, Angle::fromDegrees(90)},
                                   {500, 800, Angle::fromDegrees(270)}};

ObservationSet observeAll(const std::vector<Pose>& obs, Point guided, Point goal, int m) {
  ObservationSet z;
  const int n = static_cast<int>(obs.size());
  auto add = [&](int i, EntityId target, Point p) {
    z.insert({EntityId::observer(i), starvars::sectorOf(obs[i], p, m), target, obs[i].theta});
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (j != i) add(i, EntityId::observer(j), obs[j].position());
    add(i, EntityId::guided(), guided);
    add(i, EntityId::goal(), goal);
  }
  return z;
}

RegionSignature sig(std::vector<int> c) { return RegionSignature{std::move(c)}; }

}  // namespace

TEST_SUITE("qpf") {
  TEST_CASE("region signatures") {
    const std::vector<Pose> one{{0, 0, Angle{}}};
    CHECK(regionOf({1, 1}, one, 8) == sig({1}));
    const std::vector<Pose> facing{{0, 0, Angle{}}, {10, 0, Angle::fromDegrees(180)}};
    CHECK(regionOf({5, 0}, facing, 8) == sig({0, 0}));
    CHECK_THROWS_AS(regionOf({0, 0}, one, 8), starvars::UndefinedDirection);

    Rng rng(2, 0);
    for (int i = 0; i < 500; ++i) {
      const Point p{rng.uniform(0, 1000), rng.uniform(0, 1000)};
      const auto r = regionOf(p, kObservers, 16);
      for (std::size_t k = 0; k < kObservers.size(); ++k) {
        // brute force: scan sector wedges for the one holding p
        const double rel = normalizeAngle(std::atan2(p.y - kObservers[k].y, p.x - kObservers[k].x) -
                                          kObservers[k].theta.radians())
                               .radians();
        int found = -1;
        for (int s = 0; s < 16; ++s)
          if (rel >= s * kTwoPi / 16 && rel < (s + 1) * kTwoPi / 16) found = s;
        CHECK(r.components[k] == found);
      }
    }
  }

  TEST_CASE("weights follow exp(-distance)") {
    CHECK(qpfWeight(sig({3}), sig({3}), 8) == 1.0);
    CHECK(qpfWeight(sig({3}), sig({4}), 8) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(qpfWeight(sig({0, 0}), sig({3, 4}), 8) == doctest::Approx(std::exp(-5.0)).epsilon(1e-12));
    // literal vs circular distance around the wrap
    CHECK(signatureDistance(sig({0}), sig({15}), 16) == 15.0);
    CHECK(signatureDistance(sig({0}), sig({15}), 16, SignatureMetric::Circular) == 1.0);
    CHECK_THROWS(signatureDistance(sig({0}), sig({0, 1}), 16));
  }

  TEST_CASE("prediction stops just past the first border") {
    // single observer at the origin facing east: the border of sector 0/1
    // for m = 8 is the 45 degree ray.
    const std::vector<Pose> one{{0, 0, Angle{}}};
    Pose p{100, 10, Angle::fromDegrees(90)};
    qpfPredictTranslate(p, one, 8, 1.0, 1000);
    CHECK(p.x == 100.0);
    CHECK(p.y >= 100.0);
    CHECK(p.y - 100.0 <= 1.0);

    Pose fine{100, 10, Angle::fromDegrees(90)};
    qpfPredictTranslate(fine, one, 8, 0.1, 10000);
    CHECK(std::fabs(fine.y - p.y) <= 1.0);

    // along a ray away from the observer the region never changes
    Pose cone{100, 10, Angle::fromDegrees(5.71)};
    qpfPredictTranslate(cone, one, 8, 5.0, 20);
    CHECK(distance(cone.position(), {100, 10}) == doctest::Approx(100.0));

    // the arena boundary stops the particle
    Pose wall{990, 10, Angle{}};
    qpfPredictTranslate(wall, one, 8, 5.0, 100, starvars::Box{0, 0, 1000, 1000});
    CHECK(wall.x == 1000.0);
  }

  TEST_CASE("prediction matches plain stepping") {
    // reference: step from the start until the region changes or the box clamps
    auto stepped = [](Pose pose, int m, double step, int maxSteps, const starvars::Box& b) {
      const auto start = regionOf(pose.position(), kObservers, m);
      const double x0 = pose.x, y0 = pose.y;
      for (int k = 1; k <= maxSteps; ++k) {
        const double x = x0 + k * step * std::cos(pose.theta.radians());
        const double y = y0 + k * step * std::sin(pose.theta.radians());
        const double cx = std::clamp(x, b.xMin, b.xMax), cy = std::clamp(y, b.yMin, b.yMax);
        pose.x = cx;
        pose.y = cy;
        if (cx != x || cy != y) break;
        if (regionOf({x, y}, kObservers, m) != start) break;
      }
      return pose;
    };
    Rng rng(17, 0);
    const starvars::Box box{};
    for (int m : {8, 16, 32}) {
      for (int i = 0; i < 2000; ++i) {
        const Pose p{rng.uniform(0, 1000), rng.uniform(0, 1000), Angle::fromRadians(rng.uniform(0, 7))};
        Pose fast = p;
        qpfPredictTranslate(fast, kObservers, m, 5.0, 283, box);
        const Pose ref = stepped(p, m, 5.0, 283, box);
        CHECK(fast.x == doctest::Approx(ref.x).epsilon(1e-9));
        CHECK(fast.y == doctest::Approx(ref.y).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("stop condition") {
    WorldState w;
    w.observers = kObservers;
    w.guided = {400, 450, Angle{}};
    Rng rng(9, 1);
    const auto last = regionOf(w.guided.position(), kObservers, 16);
    for (int i = 0; i < 100; ++i) CHECK_FALSE(qpfStopCondition(w, last, 16, 0.0, rng));

    // walk east in 1 cm steps: fires at the first step whose region differs
    const std::vector<Pose> one{{0, 0, Angle{}}};
    w.observers = one;
    w.guided = {95, 100, Angle{}};
    const auto start = regionOf(w.guided.position(), one, 8);
    int steps = 0;
    RegionSignature now;
    while (!qpfStopCondition(w, start, 8, 0.0, rng, &now)) {
      w.guided.x += 1.0;
      ++steps;
    }
    // the 45 degree ray itself belongs to sector 1, so x = 101 is the first
    // position in sector 0
    CHECK(steps == 6);
    CHECK(now == sig({0}));
  }

  TEST_CASE("noisy perception far from borders rarely triggers") {
    WorldState w;
    w.observers = kObservers;
    // region centre estimate: sample until a point sits far from every sector line
    Rng pick(11, 0);
    Point p{};
    for (;;) {
      p = {pick.uniform(300, 700), pick.uniform(300, 700)};
      bool clear = true;
      for (const auto& o : kObservers) {
        const double rel = normalizeAngle(std::atan2(p.y - o.y, p.x - o.x) - o.theta.radians()).radians();
        const double eta = kTwoPi / 16;
        const double frac = rel / eta - std::floor(rel / eta);
        clear = clear && frac > 0.25 && frac < 0.75;
      }
      if (clear) break;
    }
    w.guided = {p.x, p.y, Angle{}};
    const auto last = regionOf(p, kObservers, 16);
    Rng rng(12, 1);
    int fired = 0;
    for (int i = 0; i < 2000; ++i) fired += qpfStopCondition(w, last, 16, degToRad(1.0), rng);
    CHECK(fired < 100);
  }

  TEST_CASE("mapping reproduces the observed relations") {
    const Point guided{420, 510}, goal{610, 650};
    for (int m : {8, 16, 32}) {
      const auto z = observeAll(kObservers, guided, goal, m);
      MappingOptions opt;
      opt.m = m;
      opt.box = starvars::Box{0, 0, 1000, 1000};
      const auto model = qpfMapping(z, kObservers, opt);
      REQUIRE(model.has_value());
      for (const auto& r : sectorRelations(z, 3, m)) CHECK(starvars::checkRelation(*model, r));
      CHECK(regionOf(model->entities[3].position(), kObservers, m) == regionOf(guided, kObservers, m));
    }
  }

  TEST_CASE("contradicting observations have no model") {
    auto z = observeAll(kObservers, {420, 510}, {610, 650}, 8);
    // observer 1 claims the guided agent sits in the opposite sector
    const auto* t = z.find(EntityId::observer(1), EntityId::guided());
    const int s = std::get<SectorIndex>(t->measurement).value;
    z.insert({EntityId::observer(1), SectorIndex{(s + 4) % 8}, EntityId::guided(), kObservers[1].theta});
    MappingOptions opt;
    opt.m = 8;
    opt.box = starvars::Box{0, 0, 1000, 1000};
    CHECK_FALSE(qpfMapping(z, kObservers, opt).has_value());
  }

  TEST_CASE("update weights each particle by its region distance") {
    const Point guided{420, 510}, goal{610, 650};
    const int m = 16;
    auto z = observeAll(kObservers, guided, goal, m);
    ParticleSet ps;
    ps.goal = {goal};
    Rng rng(13, 3);
    for (int i = 0; i < 200; ++i)
      ps.guided.push_back({{rng.uniform(0, 1000), rng.uniform(0, 1000), Angle{}}, 1.0});
    const auto before = ps.guided;
    QpfUpdateOptions opt;
    opt.mapping.m = m;
    opt.mapping.box = starvars::Box{0, 0, 1000, 1000};
    std::vector<double> raw;
    REQUIRE(qpfUpdate(ps, z, kObservers, opt, rng, &raw) == UpdateStatus::Updated);
    REQUIRE(raw.size() == before.size());
    const auto target = regionOf(guided, kObservers, m);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const auto r = regionOf(before[i].pose.position(), kObservers, m);
      double d2 = 0.0;
      for (std::size_t k = 0; k < 3; ++k) d2 += std::pow(r.components[k] - target.components[k], 2);
      CHECK(std::fabs(raw[i] - std::exp(-std::sqrt(d2))) <= 1e-12);
    }
    CHECK(ps.guided.size() == 200);
    for (const auto& p : ps.guided) CHECK(p.weight == doctest::Approx(1.0 / 200));

    // an inconsistent Z_c asks for reinitialisation
    const auto* t = z.find(EntityId::observer(1), EntityId::guided());
    const int s = std::get<SectorIndex>(t->measurement).value;
    z.insert({EntityId::observer(1), SectorIndex{(s + 8) % m}, EntityId::guided(), kObservers[1].theta});
    CHECK(qpfUpdate(ps, z, kObservers, opt, rng) == UpdateStatus::Inconsistent);
  }
}
