#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "latefusion/matching.hpp"
#include "run_config.hpp"

namespace latefusion::cli {

/// Process exit codes.
enum ExitCode : int
{
    kOk = 0,
    kInputError = 1,
    kIoError = 2,
    kNumericError = 3,
};

/// Runs `body`, translating library exceptions into exit codes and printing
/// the message to `err`.
int guarded(std::ostream &err, const std::function<int()> &body);

struct SynthArgs
{
    std::filesystem::path config;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> frames;
    unsigned threads = 1;
};

struct MatchArgs
{
    RunConfig cfg;
    std::filesystem::path lidar_dir;
    std::vector<CameraSource> cameras;
    std::filesystem::path gt_dir;
    std::filesystem::path meta;
    std::filesystem::path out;
    /// Frame-level train/test split; `out` then receives the training rows.
    std::optional<double> train_fraction;
    std::filesystem::path out_test;
    std::filesystem::path train_frames;
    std::filesystem::path test_frames;
};

struct TrainArgs
{
    RunConfig cfg;
    std::filesystem::path features;
    std::filesystem::path out;
};

struct FilterArgs
{
    RunConfig cfg;
    std::filesystem::path model;
    std::filesystem::path lidar_dir;
    std::vector<CameraSource> cameras;
    std::filesystem::path meta;
    std::filesystem::path out_dir;
    std::filesystem::path frames;
};

struct EvalArgs
{
    RunConfig cfg;
    std::filesystem::path gt_dir;
    std::filesystem::path det_dir;
    std::filesystem::path out;
    std::filesystem::path out_pr;
    std::filesystem::path frames;
};

struct BandsArgs
{
    RunConfig cfg;
    std::filesystem::path gt_dir;
    std::filesystem::path det_dir;
    std::filesystem::path out;
    std::filesystem::path frames;
};

int cmd_synth(const SynthArgs &args, std::ostream &out, std::ostream &err);
int cmd_match(const MatchArgs &args, std::ostream &out, std::ostream &err);
int cmd_train(const TrainArgs &args, std::ostream &out, std::ostream &err);
int cmd_filter(const FilterArgs &args, std::ostream &out, std::ostream &err);
int cmd_eval(const EvalArgs &args, std::ostream &out, std::ostream &err);
int cmd_bands(const BandsArgs &args, std::ostream &out, std::ostream &err);

} // namespace latefusion::cli
