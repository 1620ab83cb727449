#include "linedp/config.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>

namespace linedp {

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw std::invalid_argument("bad value for " + std::string(key) + ": '" + std::string(text) + "'");
    return value;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (k_risky < 1) fail("k_risky must be >= 1");
    if (lime_n < 2) fail("lime_n must be >= 2");
    if (!(lime_sigma > 0.0)) fail("lime_sigma must be > 0");
    if (lime_k_features < k_risky) fail("lime_k_features must be >= k_risky");
    if (!(entropy_threshold_within > 0.0) || !(entropy_threshold_cross > 0.0))
        fail("entropy thresholds must be > 0");
    if (folds < 2) fail("folds must be >= 2");
    if (repeats < 1) fail("repeats must be >= 1");
}

LineDpParams RunConfig::linedp_params() const {
    LineDpParams p;
    p.k_risky = k_risky;
    p.lime.samples = lime_n;
    p.lime.kernel_width = lime_sigma;
    p.lime.k_features = lime_k_features;
    p.run_seed = seed;
    p.train.seed = seed;
    p.workers = parallelism;
    return p;
}

void set_config_value(RunConfig& c, std::string_view key, std::string_view value) {
    if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "k_risky") c.k_risky = parse_number<std::size_t>(key, value);
    else if (key == "lime_n") c.lime_n = parse_number<std::size_t>(key, value);
    else if (key == "lime_sigma") c.lime_sigma = parse_number<double>(key, value);
    else if (key == "lime_k_features") c.lime_k_features = parse_number<std::size_t>(key, value);
    else if (key == "entropy_threshold_within") c.entropy_threshold_within = parse_number<double>(key, value);
    else if (key == "entropy_threshold_cross") c.entropy_threshold_cross = parse_number<double>(key, value);
    else if (key == "folds") c.folds = parse_number<int>(key, value);
    else if (key == "repeats") c.repeats = parse_number<int>(key, value);
    else if (key == "parallelism") c.parallelism = parse_number<std::size_t>(key, value);
    else throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

void apply_config(RunConfig& config, std::istream& in, std::string_view source_name) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view s = line;
        if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument(std::string(source_name) + ":" + std::to_string(number) +
                                        ": expected key = value");
        try {
            set_config_value(config, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string(source_name) + ":" + std::to_string(number) + ": " + e.what());
        }
    }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path.string());
    apply_config(config, in, path.string());
}

}  // namespace linedp
