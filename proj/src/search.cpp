#include "smoothreg/search.hpp"

#include "smoothreg/error.hpp"

#include <cmath>

namespace smoothreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

TrialParams SearchSpace::sample(Rng& rng) const {
  TrialParams out;
  for (const auto& spec : params) {
    if (spec.when) {
      auto it = out.find(spec.when->parent);
      if (it == out.end() || it->second != spec.when->equals) continue;
    }
    out[spec.name] = std::visit(
        overloaded{
            [&](const LogUniform& d) -> ParamValue {
              return std::exp(uniform(rng, std::log(d.lo), std::log(d.hi)));
            },
            [&](const Uniform& d) -> ParamValue { return uniform(rng, d.lo, d.hi); },
            [&](const IntUniform& d) -> ParamValue {
              const auto span = static_cast<std::uint64_t>(d.hi - d.lo + 1);
              return d.lo + static_cast<std::int64_t>(uniform_index(rng, span));
            },
            [&](const Categorical& d) -> ParamValue {
              if (d.choices.empty()) throw Error("search space: empty categorical '" + spec.name + "'");
              return d.choices[uniform_index(rng, d.choices.size())];
            },
        },
        spec.distribution);
  }
  return out;
}

SearchResult random_search(const SearchSpace& space,
                           const std::function<double(const TrialParams&)>& objective,
                           int budget, std::uint64_t seed) {
  if (budget < 1) throw Error("random_search: budget must be >= 1");
  Rng rng(seed);
  SearchResult result;
  for (int t = 0; t < budget; ++t) {
    Trial trial;
    trial.params = space.sample(rng);
    try {
      trial.score = objective(trial.params);
      if (!std::isfinite(trial.score)) {
        trial.score = kFailedTrialScore;
        trial.failed = true;
      }
    } catch (const std::exception&) {
      trial.score = kFailedTrialScore;
      trial.failed = true;
    }
    if (t == 0 || trial.score > result.best_score) {
      result.best = trial.params;
      result.best_score = trial.score;
    }
    result.trials.push_back(std::move(trial));
  }
  return result;
}

double get_double(const TrialParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
  throw Error("parameter '" + key + "' is not numeric");
}

std::int64_t get_int(const TrialParams& p, const std::string& key, std::int64_t fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (const auto* i = std::get_if<std::int64_t>(&it->second)) return *i;
  if (const auto* d = std::get_if<double>(&it->second)) {
    if (std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
  }
  throw Error("parameter '" + key + "' is not an integer");
}

bool get_bool(const TrialParams& p, const std::string& key, bool fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (const auto* b = std::get_if<bool>(&it->second)) return *b;
  throw Error("parameter '" + key + "' is not a boolean");
}

std::string get_string(const TrialParams& p, const std::string& key, const std::string& fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw Error("parameter '" + key + "' is not a string");
}

nlohmann::json params_to_json(const TrialParams& p) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : p) {
    std::visit([&](const auto& x) { j[k] = x; }, v);
  }
  return j;
}

TrialParams params_from_json(const nlohmann::json& j) {
  TrialParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw Error("parameters must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (v.is_boolean()) {
      p[k] = v.get<bool>();
    } else if (v.is_number_integer()) {
      p[k] = v.get<std::int64_t>();
    } else if (v.is_number()) {
      p[k] = v.get<double>();
    } else if (v.is_string()) {
      p[k] = v.get<std::string>();
    } else {
      throw Error("parameter '" + k + "' has an unsupported JSON type");
    }
  }
  return p;
}

}  // namespace smoothreg
