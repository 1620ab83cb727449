#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "linedp/linedp.hpp"

namespace linedp {

struct RunConfig {
    std::uint64_t seed = 0;
    std::size_t k_risky = 20;
    std::size_t lime_n = 5000;
    double lime_sigma = 25.0;
    std::size_t lime_k_features = 100;
    double entropy_threshold_within = 0.7;
    double entropy_threshold_cross = 0.6;
    int folds = 10;
    int repeats = 10;
    std::size_t parallelism = 0;  // 0 = all cores

    // Throws std::invalid_argument when a value is out of range.
    void validate() const;
    LineDpParams linedp_params() const;
};

// `key = value` lines with the RunConfig field names; '#' starts a comment.
// Throws std::invalid_argument on unknown keys or malformed values.
void apply_config(RunConfig& config, std::istream& in, std::string_view source_name = "<config>");
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// Sets one field from its textual value.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);

}  // namespace linedp
