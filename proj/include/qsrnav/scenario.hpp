#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsrnav/core.hpp"

namespace qsrnav {

/// Raised for any invalid scenario: bad values, unknown keys, malformed files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CommandMap { Calibrated, Literal };
enum class SignatureMetric { Literal, Circular };
enum class ResamplingScheme { Multinomial, LowVariance };

/// Fixed initial placement of every entity. When absent from a scenario the
/// harness samples one per episode.
struct InitialLayout {
  std::vector<Pose> observers;  // observer 0 is the coordinator
  Pose guided;
  Point goal;
  bool operator==(const InitialLayout&) const = default;
};

struct NoiseConfig {
  double bearingSigmaDeg = 1.0;   // vision noise on perceived directions
  double rotationSigmaDeg = 2.0;  // delta_t on commanded turns
  double speedErrorSigma = 0.0;   // relative, per command
  double lateralSlipSigma = 0.0;  // cm/s, per command
  bool operator==(const NoiseConfig&) const = default;
};

struct FilterConfig {
  int particleCount = 200;
  double releasePositionSigma = 50.0;  // cm
  double releaseHeadingSigmaDeg = 5.0;
  double updateSigma = 30.0;    // PFQC Gaussian importance, cm
  double distanceSigma = 5.0;   // PFQC translation prediction, cm
  double qpfStepSize = 5.0;     // cm
  int qpfMaxSteps = 0;          // 0: ceil(arena diagonal / step)
  int retryCap = 10;
  int regionConfirmTicks = 5;  // consecutive perceptions that confirm a region change
  ResamplingScheme resampling = ResamplingScheme::Multinomial;
  SignatureMetric signatureMetric = SignatureMetric::Literal;
  bool operator==(const FilterConfig&) const = default;
};

struct ScenarioConfig {
  double arenaWidth = 1000.0;   // cm
  double arenaHeight = 1000.0;  // cm
  double insetMargin = 250.0;   // sampled poses keep this distance from every edge
  int observerCount = 3;
  std::optional<InitialLayout> layout;

  int m = 16;
  Method method = Method::QPF;
  double tau = 6.0;  // s, PFQC only
  bool orientationKnown = true;

  NoiseConfig noise;
  double translationSpeed = 10.0;  // cm/s
  double angularSpeed = 0.31;      // rad/s
  double dt = 0.1;                 // s
  double goalRadius = 50.0;        // cm
  double episodeTimeout = 600.0;   // s
  std::uint64_t seed = 1;

  FilterConfig filter;
  double epsilon = -1.0;
  CommandMap commandMap = CommandMap::Calibrated;

  bool operator==(const ScenarioConfig&) const = default;

  int entityCount() const { return observerCount + 2; }
  double arenaDiagonal() const;
  int qpfMaxSteps() const;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const ScenarioConfig& cfg);

/// Scenario files are JSON documents. Angles are in degrees, lengths in cm,
/// times in seconds. Unknown keys are rejected.
ScenarioConfig parseScenario(const std::string& text);
std::string serializeScenario(const ScenarioConfig& cfg);
ScenarioConfig loadScenario(const std::string& path);

}  // namespace qsrnav
