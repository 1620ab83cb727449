#include <set>

#include "linedp/baselines.hpp"
#include "linedp/random.hpp"

namespace linedp {

std::vector<RankedLine> random_baseline(std::span<const SourceFile> test, std::span<const double> probabilities,
                                        std::size_t k_risky, std::uint64_t seed) {
    std::vector<FlaggedLine> flagged;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (probabilities[i] <= kDefectiveThreshold) continue;
        const SourceFile& f = test[i];
        std::set<std::string, std::less<>> distinct;
        for (const auto& line : f.lines)
            for_each_token(line.content, [&](std::string_view tok) { distinct.emplace(tok); });
        if (distinct.empty()) continue;

        Rng rng(derive_seed(seed, f.release_id, f.path));
        std::map<std::string, double> scores;
        for (const auto& tok : distinct) scores.emplace(tok, rng.uniform(-1.0, 1.0));
        auto lines = flag_lines(f, select_risky_tokens(scores, k_risky), probabilities[i]);
        std::move(lines.begin(), lines.end(), std::back_inserter(flagged));
    }

    Rng order(splitmix64(seed ^ 0x72616e646f6d5f72ULL));
    order.shuffle(std::span<FlaggedLine>(flagged));
    std::vector<RankedLine> out;
    out.reserve(flagged.size());
    for (std::size_t r = 0; r < flagged.size(); ++r) {
        auto& f = flagged[r];
        out.push_back(RankedLine{std::move(f.release_id), std::move(f.file_path), f.line_number, f.hit_count,
                                 f.score_sum, f.file_probability, r + 1});
    }
    return out;
}

}  // namespace linedp
