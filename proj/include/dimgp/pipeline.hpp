#pragma once

#include "dimgp/common.hpp"
#include "dimgp/dataset.hpp"
#include "dimgp/evolve.hpp"
#include "dimgp/intrinsic_dim.hpp"
#include "dimgp/json_io.hpp"
#include "dimgp/select.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dimgp {

/// Everything a pipeline run needs. The echo embedded in artifacts covers
/// the semantic fields only; execution details (output directory, thread
/// count) are excluded so staged and end-to-end runs emit identical bytes.
struct RunConfig {
    std::string data_path;
    std::string format = "auto"; // auto | tsv | csv
    std::string target_column = "target";
    double train_fraction = 0.75;
    std::vector<std::string> estimators; // empty = full suite
    IdParams id_params;
    GPConfig gp;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    bool sequential = false;
    int threads = 0; // 0 = hardware concurrency; forced to 1 by sequential

    // stage inputs for the staged subcommands
    std::string front_path;
    std::string profile_path;
    std::string models_path;
    int sample_points = 100;

    void validate() const;
    FileFormat file_format() const;
    int effective_threads() const;
    json echo() const;

    std::uint64_t split_seed() const { return mix_seed(seed, 1); }
    std::uint64_t gp_seed() const { return mix_seed(seed, 2); }
    std::uint64_t bootstrap_seed() const { return mix_seed(seed, 3); }
    std::uint64_t sampling_seed() const { return mix_seed(seed, 4); }
};

struct SplitData {
    Dataset train;
    Dataset test;
    int dropped_rows = 0;
};

/// Load the configured dataset and apply the seeded train/test split.
SplitData load_and_split(const RunConfig& cfg);

int cmd_id_profile(const RunConfig& cfg);
int cmd_evolve(const RunConfig& cfg);
int cmd_select(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);
int cmd_ed(const RunConfig& cfg, const std::string& model_path);
int cmd_validate_sampling(const RunConfig& cfg);
int cmd_run(const RunConfig& cfg);
int cmd_data_summary(const RunConfig& cfg);

} // namespace dimgp
