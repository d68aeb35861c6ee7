#include "smoothreg/synthdata.hpp"

#include "smoothreg/error.hpp"
#include "smoothreg/rng.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace smoothreg {

namespace {

constexpr std::array<SynthKind, 5> kKinds{SynthKind::kFriedman1, SynthKind::kFriedman1D100, SynthKind::kStep,
                                          SynthKind::kPiecewise, SynthKind::kMultiThreshold};

double ind(bool b) { return b ? 1.0 : 0.0; }
double relu(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

std::string_view synth_name(SynthKind kind) {
  switch (kind) {
    case SynthKind::kFriedman1: return "friedman1";
    case SynthKind::kFriedman1D100: return "friedman1_d100";
    case SynthKind::kStep: return "synthetic_step";
    case SynthKind::kPiecewise: return "synthetic_piecewise";
    case SynthKind::kMultiThreshold: return "synthetic_multithreshold";
  }
  return "unknown";
}

SynthKind parse_synth_kind(std::string_view name) {
  for (auto k : kKinds) {
    if (synth_name(k) == name) return k;
  }
  throw Error("unknown synthetic dataset kind '" + std::string(name) + "'");
}

Index synth_feature_count(SynthKind kind) {
  switch (kind) {
    case SynthKind::kFriedman1: return 5;
    case SynthKind::kFriedman1D100: return 100;
    case SynthKind::kStep: return 8;
    case SynthKind::kPiecewise: return 5;
    case SynthKind::kMultiThreshold: return 6;
  }
  return 0;
}

double synth_default_noise(SynthKind kind) {
  switch (kind) {
    case SynthKind::kFriedman1:
    case SynthKind::kFriedman1D100:
      return 1.0;
    default:
      return 0.3;
  }
}

Index synth_catalogue_n(SynthKind kind) {
  return kind == SynthKind::kMultiThreshold ? 750 : 2000;
}

double synth_target(SynthKind kind, std::span<const double> x) {
  if (static_cast<Index>(x.size()) != synth_feature_count(kind)) throw Error("synth_target: wrong feature count");
  switch (kind) {
    case SynthKind::kFriedman1:
    case SynthKind::kFriedman1D100:
      return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
             10.0 * x[3] + 5.0 * x[4];
    case SynthKind::kStep:
      return 2.0 * ind(x[0] > 0.0) + 3.0 * ind(x[1] > 0.5) - 1.5 * ind(x[2] < -0.5) +
             ind(x[0] > 0.0) * ind(x[1] > 0.0);
    case SynthKind::kPiecewise:
      return 2.0 * relu(x[0]) + 1.5 * relu(-x[1]) + relu(x[2] - 0.5) - relu(x[0] + x[1]);
    case SynthKind::kMultiThreshold:
      return 3.0 * ind(x[0] > 0.0) + 2.0 * ind(x[1] > 0.5) + 1.5 * ind(x[2] < -0.3) +
             ind(std::abs(x[3]) < 1.0) + 0.5 * ind(x[0] > 0.0) * ind(x[1] > 0.0);
  }
  return 0.0;
}

Dataset generate(const SynthSpec& spec) {
  if (spec.n < 10) throw Error("generate: n must be >= 10");
  const double noise = spec.noise_std.value_or(synth_default_noise(spec.kind));
  if (!(noise >= 0.0)) throw Error("generate: noise_std must be >= 0");
  const Index d = synth_feature_count(spec.kind);
  const bool unit_cube = spec.kind == SynthKind::kFriedman1 || spec.kind == SynthKind::kFriedman1D100;

  Rng feature_rng(spec.seed);
  Rng noise_rng(spec.seed ^ 0x9E3779B97F4A7C15ULL);
  Dataset ds;
  ds.features.resize(spec.n, d);
  ds.target.resize(spec.n);
  std::vector<double> row(static_cast<std::size_t>(d));
  for (Index i = 0; i < spec.n; ++i) {
    for (Index j = 0; j < d; ++j) {
      row[static_cast<std::size_t>(j)] = unit_cube ? uniform01(feature_rng) : standard_normal(feature_rng);
      ds.features(i, j) = row[static_cast<std::size_t>(j)];
    }
    ds.target(i) = synth_target(spec.kind, row);
    if (noise > 0.0) ds.target(i) += noise * standard_normal(noise_rng);
  }
  for (Index j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  return ds;
}

}  // namespace smoothreg
