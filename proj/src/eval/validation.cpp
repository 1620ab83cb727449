#include <algorithm>
#include <map>
#include <numeric>

#include "linedp/error.hpp"
#include "linedp/eval.hpp"
#include "linedp/random.hpp"

namespace linedp {

std::vector<FoldSplit> stratified_kfold(const std::vector<bool>& labels, int folds, int repeats,
                                        std::uint64_t seed) {
    if (folds < 2) throw DataError("stratified k-fold needs at least 2 folds");
    if (repeats < 1) throw DataError("stratified k-fold needs at least 1 repeat");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
    const auto k = static_cast<std::size_t>(folds);
    if (pos.size() < k || neg.size() < k)
        throw DataError("stratified k-fold: each class needs at least " + std::to_string(folds) +
                        " members (defective " + std::to_string(pos.size()) + ", clean " +
                        std::to_string(neg.size()) + ")");

    std::vector<FoldSplit> out;
    out.reserve(static_cast<std::size_t>(folds * repeats));
    std::vector<int> assignment(labels.size());
    for (int r = 0; r < repeats; ++r) {
        Rng rng(splitmix64(seed + static_cast<std::uint64_t>(r)));
        rng.shuffle(std::span<std::size_t>(pos));
        rng.shuffle(std::span<std::size_t>(neg));
        // Deal defective items round-robin, then continue dealing clean items
        // from the next fold so fold sizes also stay within one of each other.
        for (std::size_t t = 0; t < pos.size(); ++t) assignment[pos[t]] = static_cast<int>(t % k);
        for (std::size_t t = 0; t < neg.size(); ++t)
            assignment[neg[t]] = static_cast<int>((pos.size() + t) % k);
        for (int f = 0; f < folds; ++f) {
            FoldSplit s;
            s.repeat = r;
            s.fold = f;
            for (std::size_t i = 0; i < labels.size(); ++i) (assignment[i] == f ? s.test : s.train).push_back(i);
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> cross_release_pairs(std::span<const ReleaseDataset> releases) {
    std::map<std::string, std::vector<std::size_t>> by_system;
    std::vector<std::string> system_order;
    for (std::size_t i = 0; i < releases.size(); ++i) {
        auto [it, inserted] = by_system.try_emplace(releases[i].system);
        if (inserted) system_order.push_back(releases[i].system);
        it->second.push_back(i);
    }
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& system : system_order) {
        auto& idx = by_system[system];
        const auto dated = std::count_if(idx.begin(), idx.end(),
                                         [&](std::size_t i) { return releases[i].release_date.has_value(); });
        if (dated != 0 && dated != static_cast<long>(idx.size()))
            throw DataError("system '" + system + "': some releases lack a release date");
        if (dated != 0) {
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return *releases[a].release_date < *releases[b].release_date;
            });
        }
        for (std::size_t t = 1; t < idx.size(); ++t) out.emplace_back(idx[t - 1], idx[t]);
    }
    return out;
}

}  // namespace linedp
