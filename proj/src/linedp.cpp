#include "linedp/linedp.hpp"

#include <algorithm>
#include <unordered_set>

#include "linedp/error.hpp"
#include "linedp/parallel.hpp"
#include "linedp/random.hpp"

namespace linedp {

std::optional<double> RiskyTokenSet::score_of(std::string_view token) const {
    for (const auto& [t, s] : tokens) {
        if (t == token) return s;
    }
    return std::nullopt;
}

RiskyTokenSet select_risky_tokens(const std::map<std::string, double>& scores, std::size_t k_risky) {
    RiskyTokenSet out;
    for (const auto& [tok, s] : scores) {
        if (s > 0.0) out.tokens.emplace_back(tok, s);
    }
    // std::map iteration is already lexicographic, so a stable sort keeps that tie order.
    std::stable_sort(out.tokens.begin(), out.tokens.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (out.tokens.size() > k_risky) out.tokens.resize(k_risky);
    return out;
}

std::vector<FlaggedLine> flag_lines(const SourceFile& file, const RiskyTokenSet& risky, double file_probability) {
    std::vector<FlaggedLine> out;
    if (risky.empty()) return out;
    std::unordered_map<std::string_view, double> lookup;
    for (const auto& [t, s] : risky.tokens) lookup.emplace(t, s);

    std::unordered_set<std::string_view> hits;
    for (const auto& line : file.lines) {
        hits.clear();
        double sum = 0.0;
        for_each_token(line.content, [&](std::string_view tok) {
            auto it = lookup.find(tok);
            if (it != lookup.end() && hits.insert(it->first).second) sum += it->second;
        });
        if (!hits.empty())
            out.push_back(FlaggedLine{file.release_id, file.path, line.number, hits.size(), sum, file_probability});
    }
    return out;
}

std::vector<RankedLine> rank_lines_global(std::vector<FlaggedLine> flagged) {
    std::sort(flagged.begin(), flagged.end(), [](const FlaggedLine& a, const FlaggedLine& b) {
        if (a.hit_count != b.hit_count) return a.hit_count > b.hit_count;
        if (a.score_sum != b.score_sum) return a.score_sum > b.score_sum;
        if (a.file_probability != b.file_probability) return a.file_probability > b.file_probability;
        if (a.file_path != b.file_path) return a.file_path < b.file_path;
        if (a.line_number != b.line_number) return a.line_number < b.line_number;
        return a.release_id < b.release_id;
    });
    std::vector<RankedLine> out;
    out.reserve(flagged.size());
    for (std::size_t i = 0; i < flagged.size(); ++i) {
        auto& f = flagged[i];
        out.push_back(RankedLine{std::move(f.release_id), std::move(f.file_path), f.line_number, f.hit_count,
                                 f.score_sum, f.file_probability, i + 1});
    }
    return out;
}

// ---------------------------------------------------------------------------

FileLevelModel train_file_model(std::span<const SourceFile> train, const TrainConfig& config) {
    FileLevelModel fm;
    fm.vocabulary = Vocabulary::build(train);
    std::vector<FeatureVector> X;
    std::vector<bool> y;
    X.reserve(train.size());
    for (const auto& f : train) {
        X.push_back(vectorize(f, fm.vocabulary));
        y.push_back(f.file_label);
    }
    fm.model = train_logistic(X, y, config);
    return fm;
}

std::vector<double> predict_files(const FileLevelModel& fm, std::span<const SourceFile> files) {
    std::vector<double> p;
    p.reserve(files.size());
    for (const auto& f : files) p.push_back(predict_proba(fm.model, vectorize(f, fm.vocabulary)));
    return p;
}

std::vector<double> LineDpResult::probabilities() const {
    std::vector<double> p;
    p.reserve(files.size());
    for (const auto& f : files) p.push_back(f.probability);
    return p;
}

std::vector<std::optional<Explanation>> explain_files(const FileLevelModel& fm, std::span<const SourceFile> files,
                                                      std::span<const double> probabilities,
                                                      const LineDpParams& params) {
    if (probabilities.size() != files.size()) throw ModelError("explain_files: probability count mismatch");
    std::vector<std::optional<Explanation>> out(files.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (probabilities[i] > kDefectiveThreshold) todo.push_back(i);
    }
    parallel_for(todo.size(), params.workers, [&](std::size_t t) {
        const std::size_t i = todo[t];
        const FeatureVector x = vectorize(files[i], fm.vocabulary);
        if (x.empty()) return;
        LimeConfig cfg = params.lime;
        cfg.seed = derive_seed(params.run_seed, files[i].release_id, files[i].path);
        out[i] = explain(fm.model, x, fm.vocabulary, cfg);
    });
    return out;
}

std::vector<RankedLine> rank_from_explanations(std::span<const SourceFile> files,
                                               std::span<const double> probabilities,
                                               std::span<const std::optional<Explanation>> explanations,
                                               std::size_t k_risky) {
    std::vector<FlaggedLine> flagged;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (probabilities[i] <= kDefectiveThreshold || !explanations[i]) continue;
        auto lines = flag_lines(files[i], select_risky_tokens(*explanations[i], k_risky), probabilities[i]);
        std::move(lines.begin(), lines.end(), std::back_inserter(flagged));
    }
    return rank_lines_global(std::move(flagged));
}

LineDpResult run_linedp(const FileLevelModel& fm, std::span<const SourceFile> test, const LineDpParams& params) {
    if (params.lime.k_features < params.k_risky)
        throw ModelError("LIME feature budget must be at least k_risky");
    const std::vector<double> probs = predict_files(fm, test);
    auto explanations = explain_files(fm, test, probs, params);

    LineDpResult res;
    res.ranking = rank_from_explanations(test, probs, explanations, params.k_risky);
    res.files.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        res.files.push_back(FileResult{test[i].release_id, test[i].path, probs[i], std::move(explanations[i])});
    return res;
}

LineDpResult run_linedp(std::span<const SourceFile> train, std::span<const SourceFile> test,
                        const LineDpParams& params) {
    return run_linedp(train_file_model(train, params.train), test, params);
}

std::vector<SensitivityRow> sensitivity_k(std::span<const SourceFile> train, std::span<const SourceFile> test,
                                          std::span<const std::size_t> k_grid, const LineDpParams& params) {
    if (k_grid.empty()) throw ModelError("sensitivity grid is empty");
    const std::size_t kmax = *std::max_element(k_grid.begin(), k_grid.end());
    if (*std::min_element(k_grid.begin(), k_grid.end()) < 1) throw ModelError("k values must be >= 1");

    const FileLevelModel fm = train_file_model(train, params.train);
    const std::vector<double> probs = predict_files(fm, test);
    LineDpParams p = params;
    p.lime.k_features = std::max(p.lime.k_features, kmax);
    const auto explanations = explain_files(fm, test, probs, p);
    const LineUniverse universe(test, probs);

    std::vector<SensitivityRow> rows;
    for (std::size_t k : k_grid) {
        const auto ranking = rank_from_explanations(test, probs, explanations, k);
        SensitivityRow row;
        row.value = static_cast<double>(k);
        row.metrics = evaluate_ranking(universe, ranking);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace linedp
