#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <variant>

#include "lrsim/garch.hpp"
#include "lrsim/model.hpp"
#include "lrsim/return_sim.hpp"
#include "lrsim/series_io.hpp"
#include "lrsim/vol_sim.hpp"

/// JSON parameter files. A file describes exactly one model and carries a
/// "model_type" of "stylized" or "garch".
namespace lrsim {

struct StylizedParams {
  volsim::VolSimParams vol;
  ReturnSimParams ret;
  ReturnKind kind = ReturnKind::log;
};

struct GarchModelParams {
  garch::GarchParams params;
  garch::SimOptions options;
  ReturnKind kind = ReturnKind::log;
};

using ModelParams = std::variant<StylizedParams, GarchModelParams>;

[[nodiscard]] std::string params_to_json(const ModelParams& params);
/// Throws ConfigError on malformed JSON, a missing or unknown model_type,
/// missing fields or values that fail validation.
[[nodiscard]] ModelParams params_from_json(const std::string& text);

void save_params(const std::filesystem::path& path, const ModelParams& params);
[[nodiscard]] ModelParams load_params(const std::filesystem::path& path);

[[nodiscard]] std::unique_ptr<ReturnModel> make_model(const ModelParams& params);
[[nodiscard]] ReturnKind params_kind(const ModelParams& params);

}  // namespace lrsim
