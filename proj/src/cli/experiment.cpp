#include "linedp/experiment.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>

#include "linedp/baselines.hpp"
#include "linedp/csv.hpp"
#include "linedp/linedp.hpp"
#include "linedp/random.hpp"

namespace linedp {

std::string_view setting_name(Setting s) { return s == Setting::within ? "within" : "cross"; }

Setting parse_setting(std::string_view text) {
    if (text == "within") return Setting::within;
    if (text == "cross") return Setting::cross;
    throw std::invalid_argument("setting must be 'within' or 'cross', got '" + std::string(text) + "'");
}

std::vector<std::string> parse_methods(std::string_view text) {
    if (text == "all") return kAllMethods;
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = std::min(text.find(',', start), text.size());
        std::string m(text.substr(start, comma - start));
        if (std::find(kAllMethods.begin(), kAllMethods.end(), m) == kAllMethods.end())
            throw std::invalid_argument("unknown method '" + m + "'");
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(std::move(m));
        start = comma + 1;
    }
    return out;
}

std::vector<EvaluationUnit> within_release_units(std::span<const ReleaseDataset> releases, int folds, int repeats,
                                                 std::uint64_t seed) {
    std::vector<EvaluationUnit> units;
    for (const auto& rel : releases) {
        std::vector<bool> labels;
        for (const auto& f : rel.files) labels.push_back(f.file_label);
        for (auto& split : stratified_kfold(labels, folds, repeats, derive_seed(seed, rel.release_id, "folds"))) {
            EvaluationUnit u;
            u.unit_id = rel.release_id + "#r" + std::to_string(split.repeat) + "f" + std::to_string(split.fold);
            u.group = rel.release_id;
            for (auto i : split.train) u.train.push_back(&rel.files[i]);
            for (auto i : split.test) u.test.push_back(&rel.files[i]);
            units.push_back(std::move(u));
        }
    }
    return units;
}

std::vector<EvaluationUnit> cross_release_units(std::span<const ReleaseDataset> releases) {
    std::vector<EvaluationUnit> units;
    for (auto [a, b] : cross_release_pairs(releases)) {
        EvaluationUnit u;
        u.unit_id = releases[a].release_id + "->" + releases[b].release_id;
        u.group = u.unit_id;
        for (const auto& f : releases[a].files) u.train.push_back(&f);
        for (const auto& f : releases[b].files) u.test.push_back(&f);
        units.push_back(std::move(u));
    }
    return units;
}

namespace {

std::vector<SourceFile> copy_files(const std::vector<const SourceFile*>& files) {
    std::vector<SourceFile> out;
    out.reserve(files.size());
    for (const auto* f : files) out.push_back(*f);
    return out;
}

}  // namespace

UnitRun run_methods(const EvaluationUnit& unit, std::span<const std::string> methods,
                                                 Setting setting, const RunConfig& config) {
    const auto train = copy_files(unit.train);
    const auto test = copy_files(unit.test);
    LineDpParams params = config.linedp_params();
    params.run_seed = derive_seed(config.seed, unit.unit_id, "lime");

    const FileLevelModel fm = train_file_model(train, params.train);
    const std::vector<double> probs = predict_files(fm, test);

    UnitRun run;
    run.probabilities = probs;
    auto& out = run.rankings;
    for (const auto& m : methods) {
        if (m == "linedp") {
            const auto explanations = explain_files(fm, test, probs, params);
            out.push_back(rank_from_explanations(test, probs, explanations, config.k_risky));
        } else if (m == "random") {
            out.push_back(random_baseline(test, probs, config.k_risky, derive_seed(config.seed, unit.unit_id, "random")));
        } else if (m == "tmi_lr") {
            out.push_back(tmi_lr_baseline(fm, train, test, probs, config.k_risky).ranking);
        } else if (m == "ngram") {
            const double threshold =
                setting == Setting::within ? config.entropy_threshold_within : config.entropy_threshold_cross;
            const NgramModel lm = NgramModel::train(train);
            out.push_back(rank_by_entropy(score_line_entropies(lm, test, config.parallelism), test, threshold, probs));
        } else {
            throw std::invalid_argument("unknown method '" + m + "'");
        }
    }
    return run;
}

ExperimentReport run_experiment(std::span<const ReleaseDataset> releases, Setting setting,
                                std::span<const std::string> methods, const RunConfig& config) {
    config.validate();
    const auto units = setting == Setting::within
                           ? within_release_units(releases, config.folds, config.repeats, config.seed)
                           : cross_release_units(releases);
    ExperimentReport report;
    for (const auto& unit : units) {
        const auto test = copy_files(unit.test);
        const UnitRun run = run_methods(unit, methods, setting, config);
        const LineUniverse universe(test, run.probabilities);
        for (std::size_t m = 0; m < methods.size(); ++m) {
            MetricsReport r = evaluate_ranking(universe, run.rankings[m]);
            r.setting = std::string(setting_name(setting));
            r.method = methods[m];
            r.unit_id = unit.unit_id;
            report.metrics.push_back(std::move(r));
        }
    }
    report.stats = compare_methods(report.metrics, units, setting_name(setting));
    return report;
}

namespace {

struct MetricSpec {
    std::string_view name;
    Alternative direction;  // how LINE-DP is expected to differ
    std::optional<double> (*get)(const MetricsReport&);
};

const MetricSpec kMetricSpecs[] = {
    {"recall", Alternative::greater, [](const MetricsReport& r) { return r.recall; }},
    {"far", Alternative::less, [](const MetricsReport& r) { return r.far; }},
    {"d2h", Alternative::less, [](const MetricsReport& r) { return r.d2h; }},
    {"mcc", Alternative::greater, [](const MetricsReport& r) -> std::optional<double> { return r.mcc; }},
    {"recall_top20loc", Alternative::greater, [](const MetricsReport& r) { return r.recall_top20loc; }},
    {"ifa", Alternative::less,
     [](const MetricsReport& r) -> std::optional<double> {
         if (!r.ifa) return std::nullopt;
         return static_cast<double>(r.ifa->count);
     }},
};

}  // namespace

std::vector<StatRow> compare_methods(std::span<const MetricsReport> metrics, std::span<const EvaluationUnit> units,
                                     std::string_view setting) {
    std::map<std::string, std::string> group_of;
    std::vector<std::string> groups;
    for (const auto& u : units) {
        group_of[u.unit_id] = u.group;
        if (std::find(groups.begin(), groups.end(), u.group) == groups.end()) groups.push_back(u.group);
    }
    std::vector<std::string> methods;
    for (const auto& r : metrics) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    }
    if (std::find(methods.begin(), methods.end(), "linedp") == methods.end()) return {};

    std::vector<StatRow> out;
    for (const auto& spec : kMetricSpecs) {
        // (method, group) -> (sum, count)
        std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> acc;
        for (const auto& r : metrics) {
            auto v = spec.get(r);
            auto g = group_of.find(r.unit_id);
            if (!v || g == group_of.end()) continue;
            auto& slot = acc[{r.method, g->second}];
            slot.first += *v;
            ++slot.second;
        }
        auto mean = [&](const std::string& method, const std::string& group) -> std::optional<double> {
            auto it = acc.find({method, group});
            if (it == acc.end() || it->second.second == 0) return std::nullopt;
            return it->second.first / static_cast<double>(it->second.second);
        };
        for (const auto& base : methods) {
            if (base == "linedp") continue;
            std::vector<double> ours, theirs;
            for (const auto& g : groups) {
                auto a = mean("linedp", g);
                auto b = mean(base, g);
                if (a && b) {
                    ours.push_back(*a);
                    theirs.push_back(*b);
                }
            }
            StatRow row;
            row.setting = std::string(setting);
            row.metric = std::string(spec.name);
            row.baseline = base;
            if (!ours.empty()) {
                row.pct_diff = performance_diff(ours, theirs);
                row.test = wilcoxon_one_sided(ours, theirs, spec.direction);
            }
            out.push_back(std::move(row));
        }
    }
    return out;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsReport> rows) {
    csv::write_row(out, {"setting", "method", "unit_id", "recall", "far", "d2h", "mcc", "recall_top20loc", "ifa"});
    for (const auto& r : rows) {
        const std::string ifa = r.ifa ? std::to_string(r.ifa->count) : std::string("NA");
        csv::write_row(out, {r.setting, r.method, r.unit_id, csv::format_optional(r.recall),
                             csv::format_optional(r.far), csv::format_optional(r.d2h), csv::format_double(r.mcc),
                             csv::format_optional(r.recall_top20loc), ifa});
    }
}

void write_stats_csv(std::ostream& out, std::span<const StatRow> rows) {
    csv::write_row(out, {"setting", "metric", "baseline", "pct_diff", "p_value", "effect_r", "magnitude"});
    for (const auto& r : rows) {
        const std::string p = r.test ? csv::format_double(r.test->p_value) : std::string("NA");
        const std::string e = r.test ? csv::format_double(r.test->effect_r) : std::string("NA");
        const std::string m = r.test ? std::string(magnitude_name(r.test->magnitude)) : std::string("NA");
        csv::write_row(out, {r.setting, r.metric, r.baseline, csv::format_optional(r.pct_diff), p, e, m});
    }
}

void write_ranking_csv(std::ostream& out, std::span<const RankedLine> ranking, std::string_view method) {
    if (method.empty()) {
        csv::write_row(out, {"release", "file_path", "line_number", "hit_count", "score_sum", "file_probability",
                             "global_rank"});
    } else {
        csv::write_row(out, {"release", "file_path", "line_number", "hit_count", "score_sum", "file_probability",
                             "global_rank", "method"});
    }
    for (const auto& r : ranking) {
        std::vector<std::string> row{r.release_id,
                                     r.file_path,
                                     std::to_string(r.line_number),
                                     std::to_string(r.hit_count),
                                     csv::format_double(r.score_sum),
                                     csv::format_double(r.file_probability),
                                     std::to_string(r.global_rank)};
        if (!method.empty()) row.emplace_back(method);
        csv::write_row(out, row);
    }
}

}  // namespace linedp
