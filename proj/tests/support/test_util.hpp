#pragma once

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace testutil {

inline std::vector<float> voiced(std::size_t n, unsigned seed = 1, float amplitude = 0.3f) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> noise(-0.02f, 0.02f);
    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = amplitude * static_cast<float>(std::sin(0.07 * static_cast<double>(i))) + noise(rng);
    }
    return out;
}

inline std::vector<float> silence(std::size_t n) { return std::vector<float>(n, 0.0f); }

// Distinct natural words, shuffled into a text of `count` words.
inline std::string natural_text(std::size_t count, unsigned seed) {
    static const char* words[] = {
        "the",     "quick",   "brown",   "fox",     "jumps",   "over",    "lazy",   "dog",     "morning", "coffee",
        "river",   "bank",    "walked",  "slowly",  "towards", "bright",  "city",   "lights",  "after",   "rain",
        "people",  "talked",  "about",   "weather", "market",  "prices",  "school", "garden",  "window",  "yellow",
        "station", "train",   "arrived", "late",    "again",   "because", "snow",   "covered", "tracks",  "north",
        "music",   "played",  "softly",  "while",   "children", "laughed", "near",  "old",     "stone",   "bridge",
    };
    std::mt19937 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(words) - 1);
    std::string s;
    for (std::size_t i = 0; i < count; ++i) {
        if (!s.empty()) s += ' ';
        s += words[pick(rng)];
    }
    return s;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("ss-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

template <typename Pred>
bool eventually(Pred pred, std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
        if (pred()) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return pred();
}

}  // namespace testutil
