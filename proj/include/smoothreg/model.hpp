#pragma once

#include "smoothreg/cart.hpp"
#include "smoothreg/chebypoly.hpp"
#include "smoothreg/chebytree.hpp"
#include "smoothreg/erbf.hpp"
#include "smoothreg/ridge_model.hpp"
#include "smoothreg/search.hpp"

#include "json.hpp"

#include <array>
#include <string>
#include <string_view>
#include <variant>

namespace smoothreg {

enum class ModelKind { kRidge, kDecisionTree, kChebyPoly, kChebyTree, kErbf };

inline constexpr std::array<ModelKind, 5> kAllModelKinds{
    ModelKind::kRidge, ModelKind::kDecisionTree, ModelKind::kChebyPoly, ModelKind::kChebyTree,
    ModelKind::kErbf};

std::string_view model_name(ModelKind kind);
/// Accepts ridge, dt, chebypoly, chebytree, erbf.
ModelKind parse_model_kind(std::string_view name);

/// Random state for stochastic estimators.
inline constexpr std::uint64_t kModelSeed = 42;

struct FittedModel {
  std::variant<RidgeModel, RegressionTree, ChebyPolyModel, ChebyTreeModel, ErbfModel> model;
  TrialParams params;

  ModelKind kind() const;
  Index n_features() const;
};

/// Fits `kind` with hyperparameters from `params`; absent keys take the
/// estimator defaults.
FittedModel fit_model(ModelKind kind, const TrialParams& params, const Dataset& train);

Vector predict(const FittedModel& model, const Matrix& x);

/// Hyperparameter ranges and trial budget for each estimator.
SearchSpace default_search_space(ModelKind kind);

/// Versioned JSON document holding everything needed to predict.
nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& doc);

inline constexpr int kModelFormatVersion = 1;

}  // namespace smoothreg
