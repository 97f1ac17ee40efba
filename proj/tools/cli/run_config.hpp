#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "latefusion/eval.hpp"
#include "latefusion/geometry.hpp"
#include "latefusion/matching.hpp"
#include "latefusion/verifier.hpp"

namespace latefusion::cli {

/// Settings shared by every subcommand. Defaults below, then the optional
/// --config TOML file, then explicit flags.
struct RunConfig
{
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string class_name = "Car";

    MatchConfig match;
    /// Image size for frames missing from the metadata file. Unset disables
    /// the fallback.
    std::optional<ImageDims> default_dims = ImageDims{1242, 375};

    TrainConfig train;

    double threshold = 0.5;
    bool rescore = false;

    std::string difficulty = "all";
    ApMode ap_mode = ApMode::Ap40;
    double score_floor = 0.0;
    EvalOptions eval;
};

/// Reads sections [match], [train], [filter] and [eval] plus the top-level
/// keys seed, threads and class_name. Unknown keys are rejected.
RunConfig parse_run_config(std::string_view toml_text, const std::string &source = "<config>");
RunConfig load_run_config(const std::filesystem::path &path);

} // namespace latefusion::cli
