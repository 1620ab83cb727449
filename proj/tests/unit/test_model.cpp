#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "linedp/error.hpp"
#include "linedp/model.hpp"
#include "linedp/random.hpp"

using namespace linedp;

namespace {

FeatureVector dense(std::vector<std::uint32_t> counts, std::uint64_t fp = 0) {
    FeatureVector x;
    x.dimension = counts.size();
    x.vocab_fingerprint = fp;
    for (std::uint32_t j = 0; j < counts.size(); ++j) {
        if (counts[j]) x.entries.emplace_back(j, counts[j]);
    }
    return x;
}

struct Problem {
    std::vector<FeatureVector> X;
    std::vector<bool> y;
};

// Label = presence of token 0; the other tokens are noise.
Problem planted_problem(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    Problem p;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::uint32_t> c(dim);
        for (auto& v : c) v = static_cast<std::uint32_t>(rng.below(3));
        const bool label = i % 2 == 0;
        c[0] = label ? 1 + static_cast<std::uint32_t>(rng.below(2)) : 0;
        p.X.push_back(dense(c));
        p.y.push_back(label);
    }
    return p;
}

}  // namespace

TEST_CASE("sigmoid stays strictly inside (0, 1) and is monotone") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(1000.0) < 1.0);
    CHECK(sigmoid(-1000.0) > 0.0);
    double prev = 0.0;
    for (double z = -40; z <= 40; z += 0.5) {
        CHECK(sigmoid(z) >= prev);
        prev = sigmoid(z);
    }
}

TEST_CASE("zero model predicts one half") {
    LogisticModel m;
    m.weights = {0.0, 0.0};
    CHECK(predict_proba(m, dense({3, 1})) == 0.5);
    m.weights = {1.0, 0.0};
    CHECK(predict_proba(m, dense({0, 0})) == 0.5);
}

TEST_CASE("separable toy set is ranked correctly") {
    const std::vector<FeatureVector> X{dense({1}), dense({0})};
    const std::vector<bool> y{true, false};
    const auto m = train_logistic(X, y);
    CHECK(m.status.converged);
    CHECK(predict_proba(m, dense({1})) > predict_proba(m, dense({0})));
}

TEST_CASE("identical features give the class prior") {
    std::vector<FeatureVector> X;
    std::vector<bool> y;
    for (int i = 0; i < 40; ++i) {
        X.push_back(dense({2, 1}));
        y.push_back(i % 4 == 0);
    }
    const auto m = train_logistic(X, y);
    CHECK(std::abs(predict_proba(m, dense({2, 1})) - 0.25) <= 0.01);
}

TEST_CASE("analytic gradient matches central differences") {
    Rng rng(3);
    for (int inst = 0; inst < 10; ++inst) {
        const auto p = planted_problem(12, 5, 100 + inst);
        const bool scaled = inst % 2 == 1;
        const ScalerStats stats = fit_scaler(p.X, 5);
        const LogisticObjective obj(p.X, p.y, 1.0, scaled ? &stats : nullptr);
        std::vector<double> theta(obj.parameter_count()), grad(obj.parameter_count());
        for (auto& t : theta) t = rng.uniform(-1.0, 1.0);
        obj.value_and_gradient(theta, grad);
        double worst = 0.0;
        for (std::size_t k = 0; k < theta.size(); ++k) {
            const double h = 1e-5;
            auto plus = theta, minus = theta;
            plus[k] += h;
            minus[k] -= h;
            const double fd = (obj.value(plus) - obj.value(minus)) / (2 * h);
            worst = std::max(worst, std::abs(fd - grad[k]) / std::max(1.0, std::abs(grad[k])));
        }
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("objective value is the penalised log-loss") {
    const std::vector<FeatureVector> X{dense({1}), dense({0})};
    const std::vector<bool> y{true, false};
    const LogisticObjective obj(X, y, 2.0);
    const std::vector<double> theta{0.5, -0.25};
    const double l1 = std::log1p(std::exp(-(0.5 - 0.25)));
    const double l0 = std::log1p(std::exp(-0.25));
    CHECK(obj.value(theta) == doctest::Approx(l1 + l0 + 0.5 * 2.0 * 0.25));
}

TEST_CASE("training is deterministic and reaches the tolerance") {
    const auto p = planted_problem(40, 20, 9);
    const auto a = train_logistic(p.X, p.y);
    const auto b = train_logistic(p.X, p.y);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
    CHECK(a.status.converged);
    CHECK(a.status.gradient_norm <= 1e-6);
}

TEST_CASE("hitting max_iters is reported, not thrown") {
    const auto p = planted_problem(40, 20, 9);
    TrainConfig cfg;
    cfg.max_iters = 2;
    const auto m = train_logistic(p.X, p.y, cfg);
    CHECK_FALSE(m.status.converged);
    CHECK(m.status.iterations == 2);
}

TEST_CASE("training rejects bad inputs") {
    const std::vector<FeatureVector> X{dense({1}), dense({0})};
    CHECK_THROWS_AS(train_logistic(X, std::vector<bool>{true, true}), ModelError);
    CHECK_THROWS_AS(train_logistic(X, std::vector<bool>{true}), ModelError);
    CHECK_THROWS_AS(train_logistic(std::vector<FeatureVector>{dense({1})}, std::vector<bool>{true}), ModelError);
}

TEST_CASE("prediction checks dimension and vocabulary fingerprint") {
    LogisticModel m;
    m.weights = {0.1, 0.2};
    m.vocab_fingerprint = 42;
    CHECK_THROWS_AS(predict_proba(m, dense({1})), ModelError);
    CHECK_THROWS_AS(predict_proba(m, dense({1, 1}, 43)), ModelError);
    CHECK_NOTHROW(predict_proba(m, dense({1, 1}, 42)));
}

TEST_CASE("standardised coefficients single out the planted token") {
    const auto p = planted_problem(60, 30, 17);
    const auto coef = standardized_coefficients(p.X, p.y);
    const auto best = std::max_element(coef.begin(), coef.end()) - coef.begin();
    CHECK(best == 0);

    // Noise labels: nothing comes close to the planted magnitude.
    auto noise = p;
    Rng rng(4);
    for (std::size_t i = 0; i < noise.y.size(); ++i) noise.y[i] = rng.below(2) == 1;
    for (auto& x : noise.X) {
        std::vector<std::uint32_t> c(30);
        for (auto& v : c) v = static_cast<std::uint32_t>(rng.below(3));
        x = dense(c);
    }
    const auto noise_coef = standardized_coefficients(noise.X, noise.y);
    for (double c : noise_coef) CHECK(std::abs(c) < coef[0]);
}

TEST_CASE("constant columns get a zero standardised coefficient") {
    auto p = planted_problem(30, 6, 5);
    for (auto& x : p.X) {
        std::vector<std::uint32_t> c(6);
        for (auto [j, v] : x.entries) c[j] = v;
        c[3] = 2;
        x = dense(c);
    }
    const auto coef = standardized_coefficients(p.X, p.y);
    CHECK(coef[3] == 0.0);
}

TEST_CASE("rescaling one feature keeps standardised signs and ranking") {
    const auto p = planted_problem(50, 8, 23);
    auto scaled = p;
    for (auto& x : scaled.X) {
        for (auto& [j, v] : x.entries) {
            if (j == 2) v *= 5;
        }
    }
    const auto a = standardized_coefficients(p.X, p.y);
    const auto b = standardized_coefficients(scaled.X, scaled.y);
    for (std::size_t j = 0; j < a.size(); ++j) {
        CHECK((a[j] > 0) == (b[j] > 0));
        CHECK(b[j] == doctest::Approx(a[j]).epsilon(1e-6));
    }
}

TEST_CASE("standardised model predicts through its scaler") {
    const auto p = planted_problem(30, 6, 8);
    const auto m = train_standardized(p.X, p.y);
    REQUIRE(m.scaler.has_value());
    for (std::size_t i = 0; i < p.X.size(); ++i) {
        double z = m.bias;
        for (std::size_t j = 0; j < 6; ++j)
            z += m.weights[j] * (p.X[i].count(static_cast<std::uint32_t>(j)) - m.scaler->mean[j]) / m.scaler->scale(j);
        CHECK(m.decision(p.X[i]) == doctest::Approx(z).epsilon(1e-12));
    }
}

TEST_CASE("model JSON round trip and validation") {
    const auto vocab = Vocabulary::from_tokens({"alpha", "beta"});
    std::vector<FeatureVector> X{dense({1, 0}, vocab.fingerprint()), dense({0, 1}, vocab.fingerprint()),
                                 dense({2, 0}, vocab.fingerprint()), dense({0, 2}, vocab.fingerprint())};
    const std::vector<bool> y{true, false, true, false};
    const auto m = train_standardized(X, y);
    const auto dir = std::filesystem::temp_directory_path() / "linedp_model_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "model.json";
    save_model(path, m, vocab);
    const auto back = load_model(path);
    CHECK(back.vocabulary.tokens() == vocab.tokens());
    CHECK(back.model.weights == m.weights);
    CHECK(back.model.bias == m.bias);
    REQUIRE(back.model.scaler.has_value());
    CHECK(back.model.scaler->std == m.scaler->std);
    CHECK(back.model.status.converged == m.status.converged);

    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto write = [&](const std::string& body) {
        std::ofstream out(dir / "bad.json");
        out << body;
    };
    const auto replace = [&](std::string s, const std::string& from, const std::string& to) {
        s.replace(s.find(from), from.size(), to);
        return s;
    };
    write(replace(text, "\"format_version\": 1", "\"format_version\": 99"));
    CHECK_THROWS_AS(load_model(dir / "bad.json"), ModelError);
    write(replace(text, "\"alpha\"", "\"gamma\""));
    CHECK_THROWS_AS(load_model(dir / "bad.json"), ModelError);
    write("{not json");
    CHECK_THROWS_AS(load_model(dir / "bad.json"), ModelError);
    std::filesystem::remove_all(dir);
}
