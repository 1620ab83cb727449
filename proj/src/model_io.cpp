#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "linedp/error.hpp"
#include "linedp/io.hpp"
#include "linedp/model.hpp"

namespace linedp {

namespace {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<double> finite_vector(const json& j, const char* what) {
    auto v = j.get<std::vector<double>>();
    for (double x : v) {
        if (!std::isfinite(x)) throw ModelError(std::string{"non-finite value in "} + what);
    }
    return v;
}

}  // namespace

void save_model(const std::filesystem::path& path, const LogisticModel& model, const Vocabulary& vocab) {
    if (vocab.size() != model.weights.size())
        throw ModelError("vocabulary size does not match model dimension");
    if (model.vocab_fingerprint != 0 && model.vocab_fingerprint != vocab.fingerprint())
        throw ModelError("model was trained on a different vocabulary");
    json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["vocabulary"] = vocab.tokens();
    doc["vocab_fingerprint"] = hex64(vocab.fingerprint());
    doc["weights"] = model.weights;
    doc["bias"] = model.bias;
    if (model.scaler) {
        doc["scaler"] = {{"mean", model.scaler->mean}, {"std", model.scaler->std}};
    } else {
        doc["scaler"] = nullptr;
    }
    doc["train_meta"] = {{"l2_lambda", model.config.l2_lambda},
                         {"max_iters", model.config.max_iters},
                         {"tolerance", model.config.tolerance},
                         {"seed", model.config.seed},
                         {"iterations", model.status.iterations},
                         {"converged", model.status.converged},
                         {"gradient_norm", model.status.gradient_norm}};
    write_atomically(path, [&](std::ostream& out) { out << doc.dump(1) << '\n'; });
}

LoadedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ModelError("model '" + path.string() + "' is not valid JSON: " + e.what());
    }
    try {
        const int version = doc.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw ModelError("unsupported model format_version " + std::to_string(version));

        LoadedModel out;
        out.vocabulary = Vocabulary::from_tokens(doc.at("vocabulary").get<std::vector<std::string>>());
        if (doc.at("vocab_fingerprint").get<std::string>() != hex64(out.vocabulary.fingerprint()))
            throw ModelError("vocabulary fingerprint mismatch in '" + path.string() + "'");

        LogisticModel& m = out.model;
        m.weights = finite_vector(doc.at("weights"), "weights");
        m.bias = doc.at("bias").get<double>();
        if (!std::isfinite(m.bias)) throw ModelError("non-finite bias");
        if (m.weights.size() != out.vocabulary.size())
            throw ModelError("weight count does not match vocabulary size");
        m.vocab_fingerprint = out.vocabulary.fingerprint();
        if (const auto& sc = doc.at("scaler"); !sc.is_null()) {
            ScalerStats s{finite_vector(sc.at("mean"), "scaler mean"), finite_vector(sc.at("std"), "scaler std")};
            if (s.mean.size() != m.weights.size() || s.std.size() != m.weights.size())
                throw ModelError("scaler statistics do not match vocabulary size");
            m.scaler = std::move(s);
        }
        const auto& meta = doc.at("train_meta");
        m.config.l2_lambda = meta.at("l2_lambda").get<double>();
        m.config.max_iters = meta.at("max_iters").get<int>();
        m.config.tolerance = meta.at("tolerance").get<double>();
        m.config.seed = meta.at("seed").get<std::uint64_t>();
        m.status.iterations = meta.value("iterations", 0);
        m.status.converged = meta.value("converged", false);
        m.status.gradient_norm = meta.value("gradient_norm", 0.0);
        return out;
    } catch (const json::exception& e) {
        throw ModelError("malformed model '" + path.string() + "': " + e.what());
    }
}

}  // namespace linedp
