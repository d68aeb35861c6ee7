#pragma once

#include "smoothreg/dataset.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace smoothreg {

enum class SynthKind { kFriedman1, kFriedman1D100, kStep, kPiecewise, kMultiThreshold };

struct SynthSpec {
  SynthKind kind = SynthKind::kFriedman1;
  Index n = 2000;
  /// nullopt selects the per-kind default.
  std::optional<double> noise_std;
  std::uint64_t seed = 0;
};

std::string_view synth_name(SynthKind kind);
/// Accepts friedman1, friedman1_d100, synthetic_step, synthetic_piecewise,
/// synthetic_multithreshold.
SynthKind parse_synth_kind(std::string_view name);

Index synth_feature_count(SynthKind kind);
double synth_default_noise(SynthKind kind);
/// Row count of the catalogue dataset of this kind.
Index synth_catalogue_n(SynthKind kind);

/// Noise-free target for one row of features.
double synth_target(SynthKind kind, std::span<const double> x);

Dataset generate(const SynthSpec& spec);

}  // namespace smoothreg
