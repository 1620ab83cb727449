#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "linedp/baselines.hpp"
#include "linedp/error.hpp"
#include "linedp/parallel.hpp"

namespace linedp {

namespace {

using TokenId = NgramModel::TokenId;

std::string pack(std::span<const TokenId> ids) {
    std::string key(ids.size() * sizeof(TokenId), '\0');
    if (!ids.empty()) std::memcpy(key.data(), ids.data(), key.size());
    return key;
}

void count(detail::NgramTables& tables, std::span<const TokenId> history, TokenId token) {
    for (std::size_t o = 1; o <= tables.size(); ++o) {
        if (history.size() < o - 1) break;
        auto& ctx = tables[o - 1][pack(history.last(o - 1))];
        ++ctx.total;
        ++ctx.next[token];
    }
}

}  // namespace

void NgramModel::Cache::observe(std::span<const TokenId> history, TokenId token) {
    count(tables_, history, token);
}

std::vector<TokenId> NgramModel::encode(const SourceFile& file, std::vector<std::size_t>* line_starts) const {
    std::vector<TokenId> ids(static_cast<std::size_t>(config_.order - 1), kBegin);
    for (const auto& line : file.lines) {
        if (line_starts) line_starts->push_back(ids.size());
        for_each_token(line.content, [&](std::string_view tok) { ids.push_back(id_of(tok)); });
        ids.push_back(kEndOfLine);
    }
    return ids;
}

NgramModel NgramModel::train(std::span<const SourceFile> files, const NgramConfig& config) {
    if (config.order < 1) throw ModelError("n-gram order must be >= 1");
    if (!(config.jm_lambda > 0.0 && config.jm_lambda < 1.0)) throw ModelError("jm_lambda must be in (0, 1)");
    if (!(config.cache_weight >= 0.0 && config.cache_weight < 1.0))
        throw ModelError("cache_weight must be in [0, 1)");

    NgramModel m;
    m.config_ = config;
    std::set<std::string, std::less<>> types;
    for (const auto& f : files)
        for (const auto& line : f.lines) for_each_token(line.content, [&](std::string_view t) { types.emplace(t); });
    m.names_ = {"<unk>", "<s>", "<eol>"};
    m.names_.insert(m.names_.end(), types.begin(), types.end());
    for (TokenId i = 0; i < m.names_.size(); ++i) m.ids_.emplace(m.names_[i], i);

    m.tables_.resize(static_cast<std::size_t>(config.order));
    const std::size_t pad = static_cast<std::size_t>(config.order - 1);
    for (const auto& f : files) {
        const auto ids = m.encode(f, nullptr);
        for (std::size_t i = pad; i < ids.size(); ++i)
            count(m.tables_, std::span<const TokenId>(ids).first(i), ids[i]);
    }
    return m;
}

NgramModel::TokenId NgramModel::id_of(std::string_view token) const {
    auto it = ids_.find(token);
    // Marker spellings in source text are ordinary unseen tokens.
    if (it == ids_.end() || it->second == kBegin || it->second == kEndOfLine) return kUnknown;
    return it->second;
}

std::vector<NgramModel::TokenId> NgramModel::outcomes() const {
    std::vector<TokenId> out;
    for (TokenId i = 0; i < names_.size(); ++i) {
        if (i != kBegin) out.push_back(i);
    }
    return out;
}

double NgramModel::interpolate(const detail::NgramTables& tables, std::span<const TokenId> history,
                               TokenId token) const {
    const double lambda = config_.jm_lambda;
    double p = 1.0 / static_cast<double>(outcome_count());
    for (std::size_t o = 1; o <= tables.size(); ++o) {
        if (history.size() < o - 1) break;
        auto it = tables[o - 1].find(pack(history.last(o - 1)));
        if (it == tables[o - 1].end() || it->second.total == 0) continue;
        auto hit = it->second.next.find(token);
        const double ml = hit == it->second.next.end()
                              ? 0.0
                              : static_cast<double>(hit->second) / static_cast<double>(it->second.total);
        p = lambda * ml + (1.0 - lambda) * p;
    }
    return p;
}

double NgramModel::probability(std::span<const TokenId> history, TokenId token, const Cache* cache) const {
    const double p_static = interpolate(tables_, history, token);
    if (cache == nullptr || config_.cache_weight == 0.0) return p_static;
    // The cache joins only once it has seen the immediate context.
    const std::size_t gate = std::min<std::size_t>(2, cache->tables_.size());
    if (history.size() < gate - 1) return p_static;
    auto it = cache->tables_[gate - 1].find(pack(history.last(gate - 1)));
    if (it == cache->tables_[gate - 1].end() || it->second.total == 0) return p_static;
    const double p_cache = interpolate(cache->tables_, history, token);
    return (1.0 - config_.cache_weight) * p_static + config_.cache_weight * p_cache;
}

std::vector<std::optional<double>> NgramModel::line_entropies(const SourceFile& file) const {
    std::vector<std::size_t> starts;
    const auto ids = encode(file, &starts);
    std::vector<std::optional<double>> out(file.lines.size());
    Cache cache(config_.order);
    const std::span<const TokenId> all(ids);
    for (std::size_t l = 0; l < file.lines.size(); ++l) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = starts[l];; ++i) {
            const auto history = all.first(i);
            const double p = probability(history, ids[i], &cache);
            cache.observe(history, ids[i]);
            if (ids[i] == kEndOfLine) break;
            sum += -std::log2(p);
            ++n;
        }
        if (n > 0) out[l] = sum / static_cast<double>(n);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<LineEntropy> score_line_entropies(const NgramModel& model, std::span<const SourceFile> test,
                                              std::size_t workers) {
    std::vector<std::vector<std::optional<double>>> per_file(test.size());
    parallel_for(test.size(), workers, [&](std::size_t i) { per_file[i] = model.line_entropies(test[i]); });
    std::vector<LineEntropy> out;
    for (std::size_t i = 0; i < test.size(); ++i) {
        for (std::size_t l = 0; l < per_file[i].size(); ++l) {
            if (per_file[i][l]) out.push_back(LineEntropy{i, test[i].lines[l].number, *per_file[i][l]});
        }
    }
    return out;
}

std::vector<RankedLine> rank_by_entropy(std::span<const LineEntropy> scores, std::span<const SourceFile> test,
                                        double threshold, std::span<const double> probabilities) {
    std::vector<const LineEntropy*> kept;
    for (const auto& s : scores) {
        if (s.entropy > threshold) kept.push_back(&s);
    }
    std::sort(kept.begin(), kept.end(), [&](const LineEntropy* a, const LineEntropy* b) {
        if (a->entropy != b->entropy) return a->entropy > b->entropy;
        const auto& fa = test[a->file];
        const auto& fb = test[b->file];
        if (fa.path != fb.path) return fa.path < fb.path;
        if (a->line_number != b->line_number) return a->line_number < b->line_number;
        return fa.release_id < fb.release_id;
    });
    std::vector<RankedLine> out;
    out.reserve(kept.size());
    for (std::size_t r = 0; r < kept.size(); ++r) {
        const auto& f = test[kept[r]->file];
        const double p = kept[r]->file < probabilities.size() ? probabilities[kept[r]->file] : 0.0;
        out.push_back(RankedLine{f.release_id, f.path, kept[r]->line_number, 0, kept[r]->entropy, p, r + 1});
    }
    return out;
}

std::vector<RankedLine> ngram_entropy_baseline(std::span<const SourceFile> train, std::span<const SourceFile> test,
                                               double threshold, const NgramConfig& config,
                                               std::span<const double> probabilities) {
    const NgramModel model = NgramModel::train(train, config);
    const auto scores = score_line_entropies(model, test);
    return rank_by_entropy(scores, test, threshold, probabilities);
}

std::vector<double> default_entropy_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(i / 10.0);
    return grid;
}

}  // namespace linedp
