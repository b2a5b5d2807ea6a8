#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "streamscribe/error.hpp"
#include "streamscribe/metrics.hpp"

using namespace streamscribe;

namespace {

std::string random_words(std::mt19937& rng, std::size_t max_words) {
    static const char* vocab[] = {"a", "b", "c", "dd", "ee"};
    std::uniform_int_distribution<std::size_t> len(0, max_words), pick(0, 4);
    std::string s;
    for (std::size_t i = len(rng); i > 0; --i) {
        if (!s.empty()) s += ' ';
        s += vocab[pick(rng)];
    }
    return s;
}

// Direct evaluation of the weighted formulas.
std::pair<double, double> weighted_oracle(const std::vector<double>& x, const std::vector<double>& w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    double mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mean += w[i] / total * x[i];
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::pow(w[i] / total, 2) * std::pow(x[i] - mean, 2);
    const double n = static_cast<double>(x.size());
    return {mean, x.size() < 2 ? 0.0 : std::sqrt(n / (n - 1) * acc)};
}

}  // namespace

TEST_CASE("wer examples") {
    CHECK(wer("the cat sat", "the cat sat") == 0.0);
    CHECK(wer("The cat, sat!", "the cat sat") == 0.0);
    CHECK(wer("one two three four", "one two") == doctest::Approx(0.5));
    CHECK(wer("one two", "three four") == doctest::Approx(1.0));
    CHECK(wer("one", "one two three") == doctest::Approx(2.0));
    CHECK(wer("I don't know", "i do not know") == 0.0);
    CHECK_THROWS_AS(wer("", "x"), Error);
    CHECK_THROWS_AS(wer(" ?! ", "x"), Error);
    CHECK(word_accuracy(0.25) == doctest::Approx(0.75));
    CHECK(word_accuracy(2.0) == 0.0);
}

TEST_CASE("wer matches the edit distance oracle") {
    std::mt19937 rng(5);
    for (int i = 0; i < 2000; ++i) {
        auto ref = random_words(rng, 8);
        if (ref.empty()) ref = "a";
        const auto hyp = random_words(rng, 8);
        const auto r = oracle::split(ref);
        const double expected = static_cast<double>(oracle::edit_distance(r, oracle::split(hyp))) / r.size();
        CAPTURE(ref);
        CAPTURE(hyp);
        CHECK(wer(ref, hyp) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("trailing silence padding") {
    const std::vector<float> x(100, 0.5f);
    const auto y = pad_trailing_silence(x, 16000, 2.0);
    REQUIRE(y.size() == 100 + 32000);
    CHECK(std::equal(x.begin(), x.end(), y.begin()));
    CHECK(std::all_of(y.begin() + 100, y.end(), [](float v) { return v == 0.0f; }));
}

TEST_CASE("weighted mean example") {
    const std::vector<double> x{0.2, 0.5}, w{1.0, 1.0};
    CHECK(weighted_mean(x, w).mean == doctest::Approx(0.35));
    const std::vector<double> x3{0.1, 0.2, 0.6}, w3{10.0, 20.0, 70.0};
    const auto s = weighted_mean(x3, w3);
    CHECK(s.mean == doctest::Approx(0.01 + 0.04 + 0.42));
    const auto [m, se] = weighted_oracle(x3, w3);
    CHECK(s.mean == doctest::Approx(m).epsilon(1e-12));
    CHECK(s.standard_error == doctest::Approx(se).epsilon(1e-12));
    const std::vector<double> one{0.7}, w1{3.0};
    CHECK(weighted_mean(one, w1).standard_error == 0.0);
}

TEST_CASE("weighted mean against the direct formula") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> val(0.0, 1.0), wt(0.5, 60.0);
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 1 + t % 20;
        std::vector<double> x(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = val(rng);
            w[i] = wt(rng);
        }
        const auto s = weighted_mean(x, w);
        const auto [m, se] = weighted_oracle(x, w);
        CHECK(std::fabs(s.mean - m) <= 1e-9 * std::max(1.0, std::fabs(m)));
        CHECK(std::fabs(s.standard_error - se) <= 1e-9 * std::max(1.0, se));

        // Equal weights reduce to the plain mean.
        const std::vector<double> equal(n, 2.5);
        CHECK(weighted_mean(x, equal).mean == doctest::Approx(std::accumulate(x.begin(), x.end(), 0.0) / n));
    }
}

TEST_CASE("weighted mean rejects bad input") {
    const std::vector<double> x{1.0, 2.0}, w1{1.0}, neg{1.0, -1.0}, zero{0.0, 0.0}, none;
    CHECK_THROWS_AS(weighted_mean(x, w1), Error);
    CHECK_THROWS_AS(weighted_mean(x, neg), Error);
    CHECK_THROWS_AS(weighted_mean(x, zero), Error);
    CHECK_THROWS_AS(weighted_mean(none, none), Error);
}

TEST_CASE("mean ranks") {
    const auto r = mean_ranks({{0.9, 0.8}, {0.8, 0.9}});
    CHECK(r[0] == 1.5);
    CHECK(r[1] == 1.5);
    const auto s = mean_ranks({{0.9, 0.8, 0.8}, {0.5, 0.6, 0.7}});
    CHECK(s[0] == doctest::Approx((1.0 + 3.0) / 2));
    CHECK(s[1] == doctest::Approx((2.5 + 2.0) / 2));
    CHECK(s[2] == doctest::Approx((2.5 + 1.0) / 2));
    CHECK_THROWS_AS(mean_ranks({}), Error);
    CHECK_THROWS_AS(mean_ranks({{1.0, 2.0}, {1.0}}), Error);
}

TEST_CASE("wilcoxon exact matches enumeration") {
    std::mt19937 rng(23);
    for (int t = 0; t < 600; ++t) {
        const std::size_t n = 1 + t % 10;
        // Coarse values so ties and zeros occur often.
        std::uniform_int_distribution<int> v(-4, 4);
        std::vector<double> d(n);
        for (auto& x : d) x = v(rng) * 0.25;
        const auto got = wilcoxon_signed_rank(d);
        const auto want = oracle::signed_rank_enumerate(d);
        CAPTURE(t);
        CHECK(got.n_total == n);
        REQUIRE(got.n_effective == want.n);
        if (want.n == 0) {
            CHECK_FALSE(got.p_greater.has_value());
            CHECK_FALSE(got.p_two_sided.has_value());
            continue;
        }
        CHECK(got.exact);
        CHECK(got.w_plus == doctest::Approx(want.w_plus));
        CHECK(got.w_plus + got.w_minus == doctest::Approx(want.n * (want.n + 1) / 2.0));
        CHECK(*got.p_greater == doctest::Approx(want.p_greater).epsilon(1e-12));
        CHECK(*got.p_less == doctest::Approx(want.p_less).epsilon(1e-12));
        CHECK(*got.p_two_sided == doctest::Approx(std::min(1.0, 2 * std::min(want.p_greater, want.p_less))));
    }
}

TEST_CASE("wilcoxon small cases") {
    const std::vector<double> pos{0.1, 0.2, 0.3, 0.4, 0.5};
    const auto r = wilcoxon_signed_rank(pos);
    CHECK(r.w_plus == 15.0);
    CHECK(*r.p_greater == doctest::Approx(1.0 / 32.0).epsilon(1e-15));
    CHECK(*r.p_two_sided == doctest::Approx(2.0 / 32.0));
    CHECK(*r.p_less == 1.0);

    const std::vector<double> zeros{0.0, 1e-14, -1e-13};
    const auto z = wilcoxon_signed_rank(zeros);
    CHECK(z.n_total == 3);
    CHECK(z.n_effective == 0);
    CHECK_FALSE(z.p_greater.has_value());

    const std::vector<double> bad{1.0, NAN};
    CHECK_THROWS_AS(wilcoxon_signed_rank(bad), Error);
}

TEST_CASE("wilcoxon normal approximation tracks the sampled null") {
    std::mt19937 rng(29);
    std::normal_distribution<double> shift(0.3, 1.0);
    for (int t = 0; t < 4; ++t) {
        std::vector<double> d(40);
        for (auto& x : d) x = std::round(shift(rng) * 4.0) / 4.0;
        const auto r = wilcoxon_signed_rank(d);
        REQUIRE_FALSE(r.exact);

        // Monte Carlo over random sign flips of the observed ranks.
        std::vector<double> mag;
        for (double x : d) {
            if (x != 0.0) mag.push_back(std::fabs(x));
        }
        std::vector<double> rank(mag.size());
        for (std::size_t i = 0; i < mag.size(); ++i) {
            double less = 0, equal = 0;
            for (double y : mag) {
                less += y < mag[i];
                equal += y == mag[i];
            }
            rank[i] = less + (equal + 1) / 2;
        }
        const int draws = 200000;
        int ge = 0;
        std::bernoulli_distribution coin(0.5);
        for (int k = 0; k < draws; ++k) {
            double w = 0;
            for (double rk : rank) w += coin(rng) ? rk : 0.0;
            ge += w >= r.w_plus - 1e-9;
        }
        CHECK(std::fabs(*r.p_greater - static_cast<double>(ge) / draws) < 0.01);
    }
    // The exact path and the approximation agree closely just below the limit.
    std::vector<double> d(25);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (i % 3 == 0 ? -1.0 : 1.0) * static_cast<double>(i + 1);
    const auto exact = wilcoxon_signed_rank(d, 25);
    const auto approx = wilcoxon_signed_rank(d, 0);
    CHECK(exact.exact);
    CHECK_FALSE(approx.exact);
    CHECK(std::fabs(*exact.p_two_sided - *approx.p_two_sided) < 0.01);
}
