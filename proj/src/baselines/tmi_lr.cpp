#include "linedp/baselines.hpp"
#include "linedp/error.hpp"

namespace linedp {

RiskyTokenSet tmi_lr_risky_tokens(const Vocabulary& vocab, std::span<const double> coefficients,
                                  std::size_t k_risky) {
    if (coefficients.size() != vocab.size())
        throw ModelError("coefficient count does not match the vocabulary");
    std::map<std::string, double> positive;
    for (std::uint32_t j = 0; j < coefficients.size(); ++j) {
        if (coefficients[j] > 0.0) positive.emplace(vocab.token(j), coefficients[j]);
    }
    return select_risky_tokens(positive, k_risky);
}

TmiLrResult tmi_lr_baseline(const FileLevelModel& fm, std::span<const SourceFile> train,
                            std::span<const SourceFile> test, std::span<const double> probabilities,
                            std::size_t k_risky) {
    std::vector<FeatureVector> X;
    std::vector<bool> y;
    X.reserve(train.size());
    for (const auto& f : train) {
        X.push_back(vectorize(f, fm.vocabulary));
        y.push_back(f.file_label);
    }
    TmiLrResult res;
    res.risky = tmi_lr_risky_tokens(fm.vocabulary, standardized_coefficients(X, y, fm.model.config), k_risky);

    std::vector<FlaggedLine> flagged;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (probabilities[i] <= kDefectiveThreshold) continue;
        auto lines = flag_lines(test[i], res.risky, probabilities[i]);
        std::move(lines.begin(), lines.end(), std::back_inserter(flagged));
    }
    res.ranking = rank_lines_global(std::move(flagged));
    return res;
}

}  // namespace linedp
