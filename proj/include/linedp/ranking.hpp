#pragma once

#include <cstddef>
#include <string>

namespace linedp {

// One line of a global defect-proneness ranking.  Every method (LINE-DP and
// the baselines) emits this shape so they share one evaluation path.
struct RankedLine {
    std::string release_id;
    std::string file_path;
    int line_number = 0;
    std::size_t hit_count = 0;  // distinct risky tokens on the line (0 for entropy ranking)
    double score_sum = 0.0;     // summed risky-token scores, or mean surprisal for n-gram
    double file_probability = 0.0;
    std::size_t global_rank = 0;  // 1-based

    bool operator==(const RankedLine&) const = default;
};

}  // namespace linedp
