#pragma once

#include "smoothreg/rng.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace smoothreg {

using ParamValue = std::variant<bool, std::int64_t, double, std::string>;
using TrialParams = std::map<std::string, ParamValue>;

struct LogUniform {
  double lo, hi;
};
struct Uniform {
  double lo, hi;
};
struct IntUniform {
  std::int64_t lo, hi;  // inclusive
};
struct Categorical {
  std::vector<ParamValue> choices;
};

/// Sample the parameter only when `parent` currently equals `equals`.
struct Condition {
  std::string parent;
  ParamValue equals;
};

struct ParamSpec {
  std::string name;
  std::variant<LogUniform, Uniform, IntUniform, Categorical> distribution;
  std::optional<Condition> when;
};

struct SearchSpace {
  std::vector<ParamSpec> params;
  int trial_budget = 1;

  TrialParams sample(Rng& rng) const;
};

struct Trial {
  TrialParams params;
  double score = 0.0;
  bool failed = false;
};

struct SearchResult {
  TrialParams best;
  double best_score = 0.0;
  std::vector<Trial> trials;
};

/// Score assigned to a trial whose objective throws.
inline constexpr double kFailedTrialScore = -1e9;

/// Seeded i.i.d. sampling; returns the highest-scoring trial (earliest on
/// ties).
SearchResult random_search(const SearchSpace& space,
                           const std::function<double(const TrialParams&)>& objective,
                           int budget, std::uint64_t seed);

double get_double(const TrialParams& p, const std::string& key, double fallback);
std::int64_t get_int(const TrialParams& p, const std::string& key, std::int64_t fallback);
bool get_bool(const TrialParams& p, const std::string& key, bool fallback);
std::string get_string(const TrialParams& p, const std::string& key, const std::string& fallback);

nlohmann::json params_to_json(const TrialParams& p);
TrialParams params_from_json(const nlohmann::json& j);

}  // namespace smoothreg
