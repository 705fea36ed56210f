#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "forel/dynamics.hpp"
#include "forel/game.hpp"

namespace forel {

// Configuration / input-file problems map to CLI exit code 2. The
// message always names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Game GameFromJsonText(const std::string& text);
Game GameFromJsonFile(const std::string& path);
std::string GameToJsonText(const Game& game);

struct RecurrenceSettings {
  double epsilon = 1e-2;
  double t_min = 1.0;
};

struct DivergenceSettings {
  double delta = 1e-4;
  int count = 100;
  double range = 3.0;
};

struct AnalysisSettings {
  bool coupling = false;
  bool regret = false;
  bool support = false;
  std::optional<RecurrenceSettings> recurrence;
  std::optional<DivergenceSettings> divergence;
};

struct SweepSettings {
  int n_seeds = 1;
  std::vector<std::vector<RegularizerKind>> regularizer_sets;
};

enum class StartKind { kScores, kProfile, kRandom };

struct ExperimentConfig {
  Game game;
  std::vector<RegularizerKind> regularizers;
  StartKind start = StartKind::kRandom;
  ScoreState y0;        // when start == kScores
  MixedProfile x0;      // when start == kProfile
  double horizon = 0.0;
  double step = 0.0;
  IntegrationMethod method = IntegrationMethod::kRk4;
  int sample_every = 1;
  std::uint64_t seed = 0;
  AnalysisSettings analyses;
  std::optional<MixedProfile> x_star_override;
  std::optional<Vec> weight_override;
  std::optional<SweepSettings> sweep;
  std::string output;
  std::uint64_t config_hash = 0;
};

// `base_dir` resolves a relative "game" path entry.
ExperimentConfig ConfigFromJsonText(const std::string& text,
                                    const std::string& base_dir = ".");
ExperimentConfig ConfigFromJsonFile(const std::string& path);

// Pre-image of a profile under the choice map, benchmark convention:
// entropic y = log x (requires a strictly interior profile), Euclidean
// y = x.
ScoreState ScoresFromProfile(const MixedProfile& x,
                             const std::vector<RegularizerKind>& kinds);

// Deterministic interior profile draw (flat Dirichlet per player) from a
// splittable 64-bit generator; identical across platforms.
MixedProfile RandomInteriorProfile(const Game& game, std::uint64_t seed);

}  // namespace forel
