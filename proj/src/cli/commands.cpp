#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "linedp/baselines.hpp"
#include "linedp/cli.hpp"
#include "linedp/config.hpp"
#include "linedp/csv.hpp"
#include "linedp/error.hpp"
#include "linedp/experiment.hpp"
#include "linedp/io.hpp"
#include "linedp/miner.hpp"
#include "linedp/random.hpp"

namespace linedp {

namespace {

namespace fs = std::filesystem;

// Run-configuration flags shared by the pipeline commands.  Values stay as
// text until they are applied on top of the optional config file.
struct ConfigFlags {
    std::string config_file;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App& app, std::initializer_list<const char*> keys) {
        app.add_option("--config", config_file, "key=value configuration file (flags take precedence)");
        for (const char* key : keys) {
            std::string flag = std::string("--") + key;
            std::replace(flag.begin() + 2, flag.end(), '_', '-');
            options[key] = app.add_option(flag, values[key]);
        }
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_file.empty()) apply_config_file(cfg, config_file);
        for (const auto& [key, opt] : options) {
            if (opt->count() > 0) set_config_value(cfg, key, values.at(key));
        }
        cfg.validate();
        return cfg;
    }
};

std::vector<ReleaseDataset> load_releases(const std::string& dataset, const std::string& metadata) {
    auto releases = load_dataset(dataset);
    if (!metadata.empty()) apply_release_metadata(releases, load_release_metadata(metadata));
    return releases;
}

const ReleaseDataset& pick_release(const std::vector<ReleaseDataset>& releases, const std::string& id) {
    if (id.empty()) {
        if (releases.size() != 1)
            throw std::invalid_argument("dataset holds " + std::to_string(releases.size()) +
                                        " releases; choose one with --release");
        return releases.front();
    }
    for (const auto& r : releases) {
        if (r.release_id == id) return r;
    }
    throw DataError("release '" + id + "' not found in dataset");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = std::min(text.find(',', start), text.size());
        if (comma > start) out.push_back(text.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------

int cmd_mine(const std::string& commits_path, const std::string& issues_path, const std::string& snapshot_path,
             const std::string& release, const std::string& out_path, std::ostream& out) {
    const auto releases = load_dataset(snapshot_path);
    const auto& snapshot = pick_release(releases, release);
    const auto commits = load_commits_jsonl(commits_path);
    const auto fixes = find_bugfix_commits(commits, load_issue_keys(issues_path));
    LabelStats stats;
    const auto labeled = label_defective_lines(snapshot, fixes, &stats);
    export_dataset(labeled, out_path);
    out << "commits " << commits.size() << ", bug-fixing " << fixes.size() << ", defective lines "
        << stats.matched_lines << ", unresolved " << stats.unresolved_lines << ", ignored changes "
        << stats.ignored_changes << "\n";
    return kExitOk;
}

int cmd_train(const std::string& dataset, const std::string& release_list, const std::string& out_path,
              const RunConfig& cfg, std::ostream& out) {
    const auto releases = load_dataset(dataset);
    std::vector<SourceFile> train;
    const auto wanted = split_list(release_list);
    for (const auto& id : wanted) pick_release(releases, id);
    for (const auto& r : releases) {
        if (wanted.empty() || std::find(wanted.begin(), wanted.end(), r.release_id) != wanted.end())
            train.insert(train.end(), r.files.begin(), r.files.end());
    }
    const FileLevelModel fm = train_file_model(train, cfg.linedp_params().train);
    save_model(out_path, fm.model, fm.vocabulary);
    out << "trained on " << train.size() << " files, vocabulary " << fm.vocabulary.size() << ", "
        << (fm.model.status.converged ? "converged" : "NOT converged") << " after " << fm.model.status.iterations
        << " iterations\n";
    return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& dataset, const std::string& release,
                const std::string& out_path, const RunConfig& cfg) {
    LoadedModel loaded = load_model(model_path);
    const FileLevelModel fm{std::move(loaded.vocabulary), std::move(loaded.model)};
    const auto releases = load_dataset(dataset);
    const auto& test = pick_release(releases, release);
    const auto result = run_linedp(fm, test.files, cfg.linedp_params());
    write_atomically(out_path, [&](std::ostream& o) { write_ranking_csv(o, result.ranking); });
    return kExitOk;
}

int cmd_evaluate(const std::string& dataset, const std::string& metadata, Setting setting,
                 const std::string& methods_text, const std::string& out_dir, const RunConfig& cfg,
                 std::ostream& out) {
    const auto methods = parse_methods(methods_text);
    const auto releases = load_releases(dataset, metadata);
    const auto report = run_experiment(releases, setting, methods, cfg);
    fs::create_directories(out_dir);
    write_atomically(fs::path(out_dir) / "metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, report.metrics); });
    write_atomically(fs::path(out_dir) / "stats.csv", [&](std::ostream& o) { write_stats_csv(o, report.stats); });
    out << report.metrics.size() << " metric rows, " << report.stats.size() << " comparisons\n";
    return kExitOk;
}

struct MetricSums {
    std::vector<std::optional<double>> recall, far, d2h, mcc, top20, ifa;

    void add(const MetricsReport& r) {
        recall.push_back(r.recall);
        far.push_back(r.far);
        d2h.push_back(r.d2h);
        mcc.push_back(r.mcc);
        top20.push_back(r.recall_top20loc);
        ifa.push_back(r.ifa ? std::optional<double>(static_cast<double>(r.ifa->count)) : std::nullopt);
    }

    static std::optional<double> mean(const std::vector<std::optional<double>>& v) {
        double s = 0.0;
        std::size_t n = 0;
        for (const auto& x : v) {
            if (x) {
                s += *x;
                ++n;
            }
        }
        if (n == 0) return std::nullopt;
        return s / static_cast<double>(n);
    }
};

int cmd_sensitivity(const std::string& dataset, const std::string& metadata, const std::string& target,
                    const std::string& setting_text, const std::string& out_path, const RunConfig& cfg,
                    std::ostream& out) {
    if (target != "k_risky" && target != "entropy_threshold")
        throw std::invalid_argument("target must be 'k_risky' or 'entropy_threshold'");
    const auto releases = load_releases(dataset, metadata);
    Setting setting = Setting::within;
    if (setting_text.empty()) {
        if (!cross_release_pairs(releases).empty()) setting = Setting::cross;
    } else {
        setting = parse_setting(setting_text);
    }
    const auto units = setting == Setting::cross ? cross_release_units(releases)
                                                 : within_release_units(releases, cfg.folds, cfg.repeats, cfg.seed);
    if (units.empty()) throw DataError("no evaluation units (cross-release needs two releases of a system)");

    std::vector<double> grid;
    if (target == "k_risky") {
        for (auto k : kDefaultKGrid) grid.push_back(static_cast<double>(k));
    } else {
        grid = default_entropy_grid();
    }
    std::vector<MetricSums> sums(grid.size());

    for (const auto& unit : units) {
        std::vector<SourceFile> train, test;
        for (const auto* f : unit.train) train.push_back(*f);
        for (const auto* f : unit.test) test.push_back(*f);
        LineDpParams params = cfg.linedp_params();
        params.run_seed = derive_seed(cfg.seed, unit.unit_id, "lime");
        if (target == "k_risky") {
            const auto rows = sensitivity_k(train, test, kDefaultKGrid, params);
            for (std::size_t g = 0; g < rows.size(); ++g) sums[g].add(rows[g].metrics);
        } else {
            const FileLevelModel fm = train_file_model(train, params.train);
            const auto probs = predict_files(fm, test);
            const LineUniverse universe(test, probs);
            const auto scores = score_line_entropies(NgramModel::train(train), test, cfg.parallelism);
            for (std::size_t g = 0; g < grid.size(); ++g)
                sums[g].add(evaluate_ranking(universe, rank_by_entropy(scores, test, grid[g], probs)));
        }
    }

    write_atomically(out_path, [&](std::ostream& o) {
        csv::write_row(o, {"target", "setting", "value", "recall", "far", "d2h", "mcc", "recall_top20loc", "ifa"});
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto& s = sums[g];
            csv::write_row(o, {target, setting_name(setting), csv::format_double(grid[g]),
                               csv::format_optional(MetricSums::mean(s.recall)),
                               csv::format_optional(MetricSums::mean(s.far)),
                               csv::format_optional(MetricSums::mean(s.d2h)),
                               csv::format_optional(MetricSums::mean(s.mcc)),
                               csv::format_optional(MetricSums::mean(s.top20)),
                               csv::format_optional(MetricSums::mean(s.ifa))});
        }
    });
    out << grid.size() << " rows over " << units.size() << " units\n";
    return kExitOk;
}

int cmd_density(const std::string& dataset, const std::string& out_path) {
    const auto releases = load_dataset(dataset);
    write_atomically(out_path, [&](std::ostream& o) {
        csv::write_row(o, {"release", "file_path", "file_label", "loc", "defective_lines", "density"});
        for (const auto& r : releases) {
            for (const auto& f : r.files) {
                csv::write_row(o, {r.release_id, f.path, f.file_label ? "true" : "false", std::to_string(f.loc()),
                                   std::to_string(f.defective_line_count()),
                                   csv::format_double(defect_density(f))});
            }
        }
    });
    return kExitOk;
}

int cmd_import(const std::string& file_level, const std::string& line_level, const std::string& release,
               const std::string& out_path, std::ostream& out) {
    std::ifstream fl(file_level, std::ios::binary), ll(line_level, std::ios::binary);
    if (!fl) throw DataError("cannot open " + file_level);
    if (!ll) throw DataError("cannot open " + line_level);
    PublishedImportStats stats;
    const auto ds = import_published_release(fl, ll, release, &stats);
    export_dataset(ds, out_path);
    out << stats.files << " files, " << stats.defective_lines << " defective lines, " << stats.unmatched_line_rows
        << " unmatched line rows, " << stats.label_disagreements << " file-label disagreements\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Line-level defect prediction toolkit"};
    app.require_subcommand(1);
    const std::initializer_list<const char*> lime_keys{"seed", "k_risky", "lime_n", "lime_sigma", "lime_k_features",
                                                       "parallelism"};
    const std::initializer_list<const char*> all_keys{"seed",
                                                      "k_risky",
                                                      "lime_n",
                                                      "lime_sigma",
                                                      "lime_k_features",
                                                      "entropy_threshold_within",
                                                      "entropy_threshold_cross",
                                                      "folds",
                                                      "repeats",
                                                      "parallelism"};

    std::string commits, issues, snapshot, release, out_path, dataset, releases, model, metadata, setting = "within",
                                                                                                  methods = "all",
                                                                                                  out_dir, target,
                                                                                                  file_level, line_level;

    auto* mine = app.add_subcommand("mine", "label a release snapshot from bug-fixing commits");
    mine->add_option("--commits", commits, "commit export (JSONL)")->required();
    mine->add_option("--issues", issues, "bug report ids, one per line")->required();
    mine->add_option("--snapshot", snapshot, "release snapshot in dataset CSV form")->required();
    mine->add_option("--release", release, "release id inside the snapshot");
    mine->add_option("--out", out_path, "labelled dataset CSV")->required();

    ConfigFlags train_flags, predict_flags, eval_flags, sens_flags;
    auto* train = app.add_subcommand("train", "train the file-level model");
    train->add_option("--dataset", dataset)->required();
    train->add_option("--releases", releases, "comma-separated training releases (default: all)");
    train->add_option("--out", out_path, "model JSON")->required();
    train_flags.attach(*train, {"seed"});

    auto* predict = app.add_subcommand("predict", "rank the defect-prone lines of one release");
    predict->add_option("--model", model)->required();
    predict->add_option("--dataset", dataset)->required();
    predict->add_option("--release", release);
    predict->add_option("--out", out_path, "ranked lines CSV")->required();
    predict_flags.attach(*predict, lime_keys);

    auto* evaluate = app.add_subcommand("evaluate", "within- or cross-release evaluation of all methods");
    evaluate->add_option("--dataset", dataset)->required();
    evaluate->add_option("--release-meta", metadata, "release,release_date[,system] CSV");
    evaluate->add_option("--setting", setting)->check(CLI::IsMember({"within", "cross"}));
    evaluate->add_option("--methods", methods, "comma-separated subset of linedp,random,tmi_lr,ngram, or all");
    evaluate->add_option("--out-dir", out_dir)->required();
    eval_flags.attach(*evaluate, all_keys);

    std::string sens_setting;
    auto* sens = app.add_subcommand("sensitivity", "metrics over the k_risky or entropy-threshold grid");
    sens->add_option("--dataset", dataset)->required();
    sens->add_option("--release-meta", metadata);
    sens->add_option("--target", target)->required()->check(CLI::IsMember({"k_risky", "entropy_threshold"}));
    sens->add_option("--setting", sens_setting, "within or cross (default: cross when release pairs exist)")
        ->check(CLI::IsMember({"within", "cross"}));
    sens->add_option("--out", out_path)->required();
    sens_flags.attach(*sens, all_keys);

    auto* density = app.add_subcommand("density", "per-file defect density");
    density->add_option("--dataset", dataset)->required();
    density->add_option("--out", out_path)->required();

    auto* import = app.add_subcommand("import", "convert one release of the published dataset layout");
    import->add_option("--file-level", file_level, "File,Bug,SRC CSV")->required();
    import->add_option("--line-level", line_level, "File,Commit,Line_number,Line CSV")->required();
    import->add_option("--release", release)->required();
    import->add_option("--out", out_path)->required();

    // CLI11 consumes a reversed argument vector without the program name.
    std::vector<std::string> rest;
    for (std::size_t i = args.size(); i-- > 1;) rest.push_back(args[i]);
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (mine->parsed()) return cmd_mine(commits, issues, snapshot, release, out_path, out);
        if (train->parsed()) return cmd_train(dataset, releases, out_path, train_flags.resolve(), out);
        if (predict->parsed()) return cmd_predict(model, dataset, release, out_path, predict_flags.resolve());
        if (evaluate->parsed())
            return cmd_evaluate(dataset, metadata, parse_setting(setting), methods, out_dir, eval_flags.resolve(), out);
        if (sens->parsed())
            return cmd_sensitivity(dataset, metadata, target, sens_setting, out_path, sens_flags.resolve(), out);
        if (density->parsed()) return cmd_density(dataset, out_path);
        if (import->parsed()) return cmd_import(file_level, line_level, release, out_path, out);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace linedp
