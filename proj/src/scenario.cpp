#include "qsrnav/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qsrnav {

using nlohmann::json;

namespace {

void rejectUnknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
void readInto(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

Pose readPose(const json& j, const std::string& where) {
  rejectUnknown(j, {"x", "y", "theta"}, where);
  if (!j.contains("x") || !j.contains("y")) throw ConfigError(where + ": x and y are required");
  Pose p;
  readInto(j, "x", p.x, where);
  readInto(j, "y", p.y, where);
  double deg = 0.0;
  readInto(j, "theta", deg, where);
  p.theta = Angle::fromDegrees(deg);
  return p;
}

// Degrees whose conversion back to radians reproduces the stored angle exactly.
double exactDegrees(Angle a) {
  double deg = a.degrees();
  double up = deg, down = deg;
  for (int i = 0; i < 8; ++i) {
    if (Angle::fromDegrees(up) == a) return up;
    if (Angle::fromDegrees(down) == a) return down;
    up = std::nextafter(up, 1e9);
    down = std::nextafter(down, -1e9);
  }
  return deg;
}

json writePose(const Pose& p) { return {{"x", p.x}, {"y", p.y}, {"theta", exactDegrees(p.theta)}}; }

std::string toString(CommandMap c) { return c == CommandMap::Literal ? "literal" : "calibrated"; }
std::string toString(SignatureMetric s) { return s == SignatureMetric::Literal ? "literal" : "circular"; }
std::string toString(ResamplingScheme r) {
  return r == ResamplingScheme::Multinomial ? "multinomial" : "low_variance";
}

template <typename E>
E enumFrom(const std::string& s, std::initializer_list<E> values, const std::string& where) {
  for (E v : values)
    if (toString(v) == s) return v;
  throw ConfigError(where + ": unrecognised value '" + s + "'");
}

}  // namespace

double ScenarioConfig::arenaDiagonal() const { return std::hypot(arenaWidth, arenaHeight); }

int ScenarioConfig::qpfMaxSteps() const {
  if (filter.qpfMaxSteps > 0) return filter.qpfMaxSteps;
  return static_cast<int>(std::ceil(arenaDiagonal() / filter.qpfStepSize));
}

void validate(const ScenarioConfig& c) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(c.arenaWidth > 0 && c.arenaHeight > 0, "arena dimensions must be positive");
  require(c.insetMargin >= 0 && 2 * c.insetMargin < std::min(c.arenaWidth, c.arenaHeight),
          "inset margin leaves no room for entities");
  require(c.observerCount >= 1, "at least one observer (the coordinator) is required");
  require(c.m >= 8 && c.m % 8 == 0, "granularity m must be a positive multiple of 8");
  require(c.tau > 0, "tau must be positive");
  require(c.noise.bearingSigmaDeg >= 0 && c.noise.rotationSigmaDeg >= 0 &&
              c.noise.speedErrorSigma >= 0 && c.noise.lateralSlipSigma >= 0,
          "noise standard deviations must be >= 0");
  require(c.translationSpeed > 0 && c.angularSpeed > 0, "speeds must be positive");
  require(c.dt > 0, "dt must be positive");
  require(c.goalRadius > 0, "goal radius must be positive");
  require(c.episodeTimeout > 0, "episode timeout must be positive");
  require(c.filter.particleCount >= 1, "particle count must be >= 1");
  require(c.filter.releasePositionSigma >= 0 && c.filter.releaseHeadingSigmaDeg >= 0 &&
              c.filter.distanceSigma >= 0,
          "filter spreads must be >= 0");
  require(c.filter.updateSigma > 0, "update sigma must be positive");
  require(c.filter.qpfStepSize > 0, "qpf step size must be positive");
  require(c.filter.retryCap >= 0, "retry cap must be >= 0");
  require(c.filter.regionConfirmTicks >= 1, "region confirmation needs at least one tick");
  require(c.epsilon < 0, "epsilon must be negative");
  if (c.layout) {
    require(static_cast<int>(c.layout->observers.size()) == c.observerCount,
            "layout observer count does not match observer_count");
    auto inside = [&](double x, double y) {
      return std::isfinite(x) && std::isfinite(y) && x >= 0 && y >= 0 && x <= c.arenaWidth &&
             y <= c.arenaHeight;
    };
    for (const auto& o : c.layout->observers) require(inside(o.x, o.y), "observer outside arena");
    require(inside(c.layout->guided.x, c.layout->guided.y), "guided agent outside arena");
    require(inside(c.layout->goal.x, c.layout->goal.y), "goal outside arena");
  }
}

ScenarioConfig parseScenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  rejectUnknown(j,
                {"arena", "inset_margin", "observer_count", "entities", "m", "method", "tau",
                 "orientation_known", "noise", "speeds", "dt", "goal_radius", "episode_timeout",
                 "seed", "filter", "epsilon", "command_map"},
                "scenario");
  ScenarioConfig c;
  if (j.contains("arena")) {
    const auto& a = j["arena"];
    rejectUnknown(a, {"width", "height"}, "arena");
    readInto(a, "width", c.arenaWidth, "arena");
    readInto(a, "height", c.arenaHeight, "arena");
  }
  readInto(j, "inset_margin", c.insetMargin, "scenario");
  readInto(j, "observer_count", c.observerCount, "scenario");
  if (j.contains("entities")) {
    const auto& e = j["entities"];
    rejectUnknown(e, {"observers", "guided", "goal"}, "entities");
    if (!e.contains("observers") || !e.contains("guided") || !e.contains("goal"))
      throw ConfigError("entities: observers, guided and goal are all required");
    InitialLayout layout;
    for (std::size_t i = 0; i < e["observers"].size(); ++i)
      layout.observers.push_back(readPose(e["observers"][i], "entities.observers"));
    layout.guided = readPose(e["guided"], "entities.guided");
    const auto& g = e["goal"];
    rejectUnknown(g, {"x", "y"}, "entities.goal");
    readInto(g, "x", layout.goal.x, "entities.goal");
    readInto(g, "y", layout.goal.y, "entities.goal");
    if (!j.contains("observer_count")) c.observerCount = static_cast<int>(layout.observers.size());
    c.layout = std::move(layout);
  }
  readInto(j, "m", c.m, "scenario");
  if (j.contains("method")) {
    try {
      c.method = methodFromString(j["method"].get<std::string>());
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("method: ") + ex.what());
    }
  }
  readInto(j, "tau", c.tau, "scenario");
  readInto(j, "orientation_known", c.orientationKnown, "scenario");
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    rejectUnknown(n, {"bearing_sigma_deg", "rotation_sigma_deg", "speed_error", "lateral_slip"},
                  "noise");
    readInto(n, "bearing_sigma_deg", c.noise.bearingSigmaDeg, "noise");
    readInto(n, "rotation_sigma_deg", c.noise.rotationSigmaDeg, "noise");
    readInto(n, "speed_error", c.noise.speedErrorSigma, "noise");
    readInto(n, "lateral_slip", c.noise.lateralSlipSigma, "noise");
  }
  if (j.contains("speeds")) {
    const auto& s = j["speeds"];
    rejectUnknown(s, {"translation", "rotation"}, "speeds");
    readInto(s, "translation", c.translationSpeed, "speeds");
    readInto(s, "rotation", c.angularSpeed, "speeds");
  }
  readInto(j, "dt", c.dt, "scenario");
  readInto(j, "goal_radius", c.goalRadius, "scenario");
  readInto(j, "episode_timeout", c.episodeTimeout, "scenario");
  readInto(j, "seed", c.seed, "scenario");
  if (j.contains("filter")) {
    const auto& f = j["filter"];
    rejectUnknown(f,
                  {"particles", "release_position_sigma", "release_heading_sigma_deg",
                   "update_sigma", "distance_sigma", "qpf_step_size", "qpf_max_steps",
                   "retry_cap", "region_confirm_ticks", "resampling", "signature_metric"},
                  "filter");
    readInto(f, "particles", c.filter.particleCount, "filter");
    readInto(f, "release_position_sigma", c.filter.releasePositionSigma, "filter");
    readInto(f, "release_heading_sigma_deg", c.filter.releaseHeadingSigmaDeg, "filter");
    readInto(f, "update_sigma", c.filter.updateSigma, "filter");
    readInto(f, "distance_sigma", c.filter.distanceSigma, "filter");
    readInto(f, "qpf_step_size", c.filter.qpfStepSize, "filter");
    readInto(f, "qpf_max_steps", c.filter.qpfMaxSteps, "filter");
    readInto(f, "retry_cap", c.filter.retryCap, "filter");
    readInto(f, "region_confirm_ticks", c.filter.regionConfirmTicks, "filter");
    if (f.contains("resampling"))
      c.filter.resampling =
          enumFrom(f["resampling"].get<std::string>(),
                   {ResamplingScheme::Multinomial, ResamplingScheme::LowVariance}, "filter.resampling");
    if (f.contains("signature_metric"))
      c.filter.signatureMetric =
          enumFrom(f["signature_metric"].get<std::string>(),
                   {SignatureMetric::Literal, SignatureMetric::Circular}, "filter.signature_metric");
  }
  readInto(j, "epsilon", c.epsilon, "scenario");
  if (j.contains("command_map"))
    c.commandMap = enumFrom(j["command_map"].get<std::string>(),
                            {CommandMap::Calibrated, CommandMap::Literal}, "command_map");
  validate(c);
  return c;
}

std::string serializeScenario(const ScenarioConfig& c) {
  json j;
  j["arena"] = {{"width", c.arenaWidth}, {"height", c.arenaHeight}};
  j["inset_margin"] = c.insetMargin;
  j["observer_count"] = c.observerCount;
  if (c.layout) {
    json obs = json::array();
    for (const auto& o : c.layout->observers) obs.push_back(writePose(o));
    j["entities"] = {{"observers", obs},
                     {"guided", writePose(c.layout->guided)},
                     {"goal", {{"x", c.layout->goal.x}, {"y", c.layout->goal.y}}}};
  }
  j["m"] = c.m;
  j["method"] = toString(c.method);
  j["tau"] = c.tau;
  j["orientation_known"] = c.orientationKnown;
  j["noise"] = {{"bearing_sigma_deg", c.noise.bearingSigmaDeg},
                {"rotation_sigma_deg", c.noise.rotationSigmaDeg},
                {"speed_error", c.noise.speedErrorSigma},
                {"lateral_slip", c.noise.lateralSlipSigma}};
  j["speeds"] = {{"translation", c.translationSpeed}, {"rotation", c.angularSpeed}};
  j["dt"] = c.dt;
  j["goal_radius"] = c.goalRadius;
  j["episode_timeout"] = c.episodeTimeout;
  j["seed"] = c.seed;
  j["filter"] = {{"particles", c.filter.particleCount},
                 {"release_position_sigma", c.filter.releasePositionSigma},
                 {"release_heading_sigma_deg", c.filter.releaseHeadingSigmaDeg},
                 {"update_sigma", c.filter.updateSigma},
                 {"distance_sigma", c.filter.distanceSigma},
                 {"qpf_step_size", c.filter.qpfStepSize},
                 {"qpf_max_steps", c.filter.qpfMaxSteps},
                 {"retry_cap", c.filter.retryCap},
                 {"region_confirm_ticks", c.filter.regionConfirmTicks},
                 {"resampling", toString(c.filter.resampling)},
                 {"signature_metric", toString(c.filter.signatureMetric)}};
  j["epsilon"] = c.epsilon;
  j["command_map"] = toString(c.commandMap);
  return j.dump(2);
}

ScenarioConfig loadScenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parseScenario(ss.str());
}

}  // namespace qsrnav
