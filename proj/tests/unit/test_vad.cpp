#include "doctest.h"

#include <cmath>
#include <random>

#include "streamscribe/error.hpp"
#include "streamscribe/vad.hpp"
#include "test_util.hpp"

using namespace streamscribe;

namespace {

constexpr int kRate = 16000;
constexpr std::size_t kFrame = 480;  // 30 ms at 16 kHz

double frame_rms(const std::vector<float>& x, std::size_t first) {
    double acc = 0.0;
    for (std::size_t i = first; i < first + kFrame; ++i) acc += static_cast<double>(x[i]) * x[i];
    return std::sqrt(acc / kFrame);
}

std::size_t direct_voiced_frames(const std::vector<float>& x, double threshold) {
    std::size_t n = 0;
    for (std::size_t f = 0; f + kFrame <= x.size(); f += kFrame) n += frame_rms(x, f) >= threshold;
    return n;
}

std::vector<float> sine(double hz, double seconds, double amp) {
    std::vector<float> x(static_cast<std::size_t>(seconds * kRate));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(amp * std::sin(2 * M_PI * hz * i / kRate));
    return x;
}

}  // namespace

TEST_CASE("silence and tones") {
    const VadConfig c;
    CHECK_FALSE(has_voice(std::vector<float>(4 * kRate, 0.0f), kRate, c));
    CHECK(has_voice(sine(440, 4.0, 1.0), kRate, c));
    CHECK_FALSE(has_voice({}, kRate, c));
    CHECK(count_voiced_frames(sine(440, 4.0, 1.0), kRate, c) == 4 * kRate / kFrame);
}

TEST_CASE("exactly two voiced frames stay below min_voiced_frames") {
    std::vector<float> x(kRate, 0.0f);
    // Frames 3 and 10 carry a square wave of amplitude 0.05 (RMS 0.05).
    for (std::size_t f : {3u, 10u}) {
        for (std::size_t i = 0; i < kFrame; ++i) x[f * kFrame + i] = (i % 2 ? 0.05f : -0.05f);
    }
    // A faint frame just under threshold must not count.
    for (std::size_t i = 0; i < kFrame; ++i) x[20 * kFrame + i] = (i % 2 ? 0.0099f : -0.0099f);
    const VadConfig c;
    REQUIRE(direct_voiced_frames(x, c.energy_threshold) == 2);
    CHECK(count_voiced_frames(x, kRate, c) == 2);
    CHECK_FALSE(has_voice(x, kRate, c));
    VadConfig two = c;
    two.min_voiced_frames = 2;
    CHECK(has_voice(x, kRate, two));
}

TEST_CASE("trailing partial frame is ignored") {
    std::vector<float> x(3 * kFrame, 0.0f);
    x.resize(3 * kFrame + kFrame / 2, 0.9f);
    CHECK(count_voiced_frames(x, kRate, {}) == 0);
}

TEST_CASE("frame count matches direct computation on random signals") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<float> x(std::uniform_int_distribution<std::size_t>(0, 20 * kFrame)(rng));
        std::uniform_real_distribution<float> amp(0.0f, 0.03f);
        float a = amp(rng);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (i % kFrame == 0) a = amp(rng);
            x[i] = (i % 2 ? a : -a);
        }
        CHECK(static_cast<std::size_t>(count_voiced_frames(x, kRate, {})) == direct_voiced_frames(x, 0.01));
    }
}

TEST_CASE("gain never turns a voiced decision false") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<float> gain(1.0f, 50.0f);
    const VadConfig c;
    int voiced = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto x = testutil::voiced(8 * kFrame, trial, 0.005f + 0.001f * (trial % 20));
        if (!has_voice(x, kRate, c)) continue;
        ++voiced;
        const float g = gain(rng);
        for (auto& v : x) v = std::clamp(v * g, -1.0f, 1.0f);
        CHECK(has_voice(x, kRate, c));
    }
    CHECK(voiced > 50);
}

TEST_CASE("appending or prepending silence never removes voice") {
    const VadConfig c;
    for (unsigned seed = 0; seed < 50; ++seed) {
        const auto x = testutil::voiced(5 * kFrame + seed * 7, seed, 0.1f);
        REQUIRE(has_voice(x, kRate, c));
        auto after = x;
        after.insert(after.end(), seed * 13, 0.0f);
        CHECK(has_voice(after, kRate, c));
        std::vector<float> before(kFrame * (seed % 4), 0.0f);
        before.insert(before.end(), x.begin(), x.end());
        CHECK(has_voice(before, kRate, c));
    }
}

TEST_CASE("deterministic and rate-aware") {
    const auto x = testutil::voiced(kRate, 5, 0.2f);
    CHECK(has_voice(x, kRate, {}) == has_voice(x, kRate, {}));
    EnergyVad vad;
    CHECK(vad.has_voice(x, kRate));
    CHECK(count_voiced_frames(std::vector<float>(8000, 0.5f), 8000, {}) == 33);
}

TEST_CASE("config validation") {
    auto bad = [](VadConfig c) {
        try {
            c.validate();
        } catch (const Error& e) {
            return e.code() == ErrorCode::config;
        }
        return false;
    };
    CHECK(bad({0, 0.01, 3}));
    CHECK(bad({30, 0.0, 3}));
    CHECK(bad({30, 1.0, 3}));
    CHECK(bad({30, 0.01, 0}));
    CHECK_NOTHROW(VadConfig{}.validate());
}
