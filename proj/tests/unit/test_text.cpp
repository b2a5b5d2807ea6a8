#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "streamscribe/error.hpp"
#include "streamscribe/text.hpp"
#include "test_util.hpp"

using namespace streamscribe;

namespace {

std::string random_string(std::mt19937& rng, const std::string& alphabet, std::size_t max_len) {
    std::string s(std::uniform_int_distribution<std::size_t>(0, max_len)(rng), ' ');
    for (auto& c : s) c = alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    return s;
}

std::vector<std::string> random_words(std::mt19937& rng, const std::vector<std::string>& vocab, std::size_t lo,
                                      std::size_t hi) {
    std::vector<std::string> out(std::uniform_int_distribution<std::size_t>(lo, hi)(rng));
    for (auto& w : out) w = vocab[std::uniform_int_distribution<std::size_t>(0, vocab.size() - 1)(rng)];
    return out;
}

std::string joined(const std::vector<std::string>& w) { return join(w, 0, w.size()); }

// Detection rule applied literally: some n-gram repeats back to back.
bool has_run(const std::vector<std::string>& t, std::size_t max_n, std::size_t threshold) {
    for (std::size_t n = 1; n <= max_n; ++n) {
        for (std::size_t i = 0; i + n * threshold <= t.size(); ++i) {
            bool all = true;
            for (std::size_t r = 1; r < threshold && all; ++r) {
                for (std::size_t k = 0; k < n && all; ++k) all = t[i + k] == t[i + r * n + k];
            }
            if (all) return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("levenshtein examples") {
    CHECK(levenshtein("abc", "abc") == 0);
    CHECK(levenshtein("", "abc") == 3);
    CHECK(levenshtein("abc", "") == 3);
    CHECK(levenshtein("kitten", "sitting") == 3);
    CHECK(levenshtein("flaw", "lawn") == 2);
}

TEST_CASE("levenshtein matches the recursive oracle") {
    const auto all = oracle::all_strings("abc", 5);
    for (const auto& a : all) {
        oracle::for_all_distances(a, "abc", 5, [&](const std::string& b, std::size_t d) {
            REQUIRE(levenshtein(a, b) == d);
        });
    }
    std::mt19937 rng(1);
    for (int i = 0; i < 300; ++i) {
        const auto a = random_string(rng, "abcdefgh ", 30);
        const auto b = random_string(rng, "abcdefgh ", 30);
        REQUIRE(levenshtein(a, b) == oracle::edit_distance(a, b));
        CHECK(levenshtein(a, b) == levenshtein(b, a));
    }
}

TEST_CASE("token edit distance matches the oracle") {
    std::mt19937 rng(2);
    const std::vector<std::string> vocab{"a", "b", "c", "dd", "e"};
    for (int i = 0; i < 500; ++i) {
        const auto a = random_words(rng, vocab, 0, 12);
        const auto b = random_words(rng, vocab, 0, 12);
        REQUIRE(token_edit_distance(a, b) == oracle::edit_distance(a, b));
    }
}

TEST_CASE("edit distances across the 64-symbol word boundary") {
    std::mt19937 rng(3);
    const std::string bytes = "ab\xc3\xa9\xff z";
    for (int i = 0; i < 120; ++i) {
        std::uniform_int_distribution<std::size_t> len(55, 140);
        std::string a(len(rng), ' '), b(len(rng), ' ');
        for (auto& c : a) c = bytes[rng() % bytes.size()];
        for (auto& c : b) c = bytes[rng() % bytes.size()];
        if (i % 3 == 0) b = a.substr(0, 64);
        REQUIRE(levenshtein(a, b) == oracle::edit_distance(a, b));
    }
    // Long tokens sharing their first eight bytes only differ past the key.
    const std::vector<std::string> vocab{"international", "internationally", "internet", "interne", "a", ""};
    for (int i = 0; i < 120; ++i) {
        const auto a = random_words(rng, vocab, 0, 100);
        const auto b = random_words(rng, vocab, 50, 100);
        REQUIRE(token_edit_distance(a, b) == oracle::edit_distance(a, b));
    }
    CHECK(token_edit_distance({"internationally"}, {"internationalize"}) == 1);
    CHECK(token_edit_distance({}, {"x", "y"}) == 2);
}

TEST_CASE("tokenize, join and compare forms") {
    CHECK(tokenize("  a\tb \n c  ") == std::vector<std::string>{"a", "b", "c"});
    CHECK(tokenize("").empty());
    CHECK(join({"a", "b", "c"}, 1, 3) == "b c");
    CHECK(join({"a"}, 1, 1).empty());
    CHECK(compare_token("Hello,") == "hello");
    CHECK(compare_token("...").empty());
    CHECK(compare_form("Hello,  World! ... ok") == "hello world ok");
}

TEST_CASE("suggestion examples") {
    auto s = generate_suggestion("the quick brown fox jumps high", "the quick brown fox");
    CHECK(s.text == "jumps high");
    CHECK(s.overlap_token_count == 4);
    CHECK(s.distance == 0);

    s = generate_suggestion("Hello there friend", "");
    CHECK(s.text == "Hello there friend");
    CHECK(s.overlap_token_count == 0);
    CHECK(s.distance == 0);

    s = generate_suggestion("yellow world again", "hello world");
    CHECK(s.text == "again");
    CHECK(s.overlap_token_count == 2);
    CHECK(s.distance == 2);

    s = generate_suggestion("The Quick, brown fox.", "the quick brown");
    CHECK(s.text == "fox.");

    CHECK(generate_suggestion("", "anything").text.empty());
}

TEST_CASE("suggestion matches the all-prefixes brute force") {
    std::mt19937 rng(3);
    const std::vector<std::string> vocab{"the", "a", "cat", "Cat", "sat,", "on", "mat", "hat", "at", "...", "x"};
    for (int i = 0; i < 400; ++i) {
        const auto prev = joined(random_words(rng, vocab, 0, 8));
        const auto next = joined(random_words(rng, vocab, 0, 10));
        const auto expected = oracle::suggestion(next, prev);
        const auto got = generate_suggestion(next, prev);
        INFO("new=" << next << " prev=" << prev);
        REQUIRE(got.text == expected.text);
        REQUIRE(got.overlap_token_count == expected.overlap);
        REQUIRE(got.distance == expected.distance);
    }
}

TEST_CASE("noiseless continuation yields exactly the appended tail") {
    for (unsigned seed = 0; seed < 200; ++seed) {
        const auto prev = testutil::natural_text(1 + seed % 25, seed);
        const auto tail = testutil::natural_text(seed % 7, seed + 1000);
        const auto next = tail.empty() ? prev : prev + " " + tail;
        CHECK(generate_suggestion(next, prev).text == tail);
    }
}

TEST_CASE("hallucination examples") {
    auto v = detect_hallucination("yes yes yes yes yes done");
    CHECK(v.detected);
    CHECK(v.repeated_unit == "yes");
    CHECK(v.repeat_count == 5);
    CHECK(v.filtered_text == "yes done");

    v = detect_hallucination("the cat sat on the mat");
    CHECK_FALSE(v.detected);
    CHECK(v.filtered_text == "the cat sat on the mat");

    v = detect_hallucination("go on go on go on go on go on");
    CHECK(v.detected);
    CHECK(v.repeated_unit == "go on");
    CHECK(v.repeat_count == 5);
    CHECK(v.filtered_text == "go on");

    CHECK_FALSE(detect_hallucination("yes yes yes yes done").detected);
    CHECK(detect_hallucination("Thank you. thank you thank you! THANK YOU thank you").detected);
    CHECK(detect_hallucination("a b c d a b c d a b c d a b c d a b c d end").filtered_text == "a b c d end");
    CHECK_FALSE(detect_hallucination("a b c d e a b c d e a b c d e a b c d e a b c d e").detected);
}

TEST_CASE("hallucination detection matches the counting rule") {
    std::mt19937 rng(4);
    const std::vector<std::string> vocab{"x", "y", "z"};
    int positives = 0;
    for (int i = 0; i < 3000; ++i) {
        const auto words = random_words(rng, vocab, 0, 18);
        const HallucinationConfig c{std::uniform_int_distribution<int>(1, 3)(rng),
                                    std::uniform_int_distribution<int>(2, 4)(rng)};
        const auto v = detect_hallucination(joined(words), c);
        REQUIRE(v.detected == has_run(words, c.max_ngram, c.repeat_threshold));
        positives += v.detected;
        if (!v.detected) REQUIRE(v.filtered_text == joined(words));
        if (v.detected) REQUIRE(tokenize(v.filtered_text).size() < words.size());
    }
    CHECK(positives > 300);
    CHECK(positives < 2700);
}

TEST_CASE("an inserted run collapses back to the clean text") {
    int checked = 0;
    for (unsigned seed = 0; seed < 200; ++seed) {
        std::mt19937 rng(seed);
        const auto words = tokenize(testutil::natural_text(20, seed));
        // The clean text must not contain runs of its own.
        if (has_run(words, 4, 2)) continue;
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        const std::size_t pos = std::uniform_int_distribution<std::size_t>(0, words.size() - n)(rng);
        const std::size_t reps = std::uniform_int_distribution<std::size_t>(5, 10)(rng);
        std::vector<std::string> dirty(words.begin(), words.begin() + pos);
        for (std::size_t r = 0; r < reps; ++r) dirty.insert(dirty.end(), words.begin() + pos, words.begin() + pos + n);
        dirty.insert(dirty.end(), words.begin() + pos + n, words.end());
        const auto v = detect_hallucination(joined(dirty), {4, 5});
        CHECK(v.detected);
        CHECK(v.repeat_count == static_cast<int>(reps));
        // A run preceded by the tail of its own unit is first seen rotated.
        const auto unit = tokenize(v.repeated_unit);
        REQUIRE(unit.size() == n);
        bool rotation = false;
        for (std::size_t r = 0; r < n; ++r) {
            bool same = true;
            for (std::size_t i = 0; i < n; ++i) same = same && unit[i] == words[pos + (i + r) % n];
            rotation = rotation || same;
        }
        CHECK(rotation);
        CHECK(v.filtered_text == joined(words));
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("hallucination config validation") {
    CHECK_THROWS_AS(detect_hallucination("a", {0, 5}), Error);
    CHECK_THROWS_AS(detect_hallucination("a", {4, 1}), Error);
}

TEST_CASE("normalize examples") {
    CHECK(normalize("Don't stop!") == "do not stop");
    CHECK(normalize("a  b\tc") == "a b c");
    CHECK(normalize("") == "");
    CHECK(normalize("  Hello, World.  ") == "hello world");
    CHECK(normalize("WON'T you come?") == "will not you come");
    CHECK(normalize("I can\xE2\x80\x99t go") == "i cannot go");
    CHECK(normalize("\"They're here,\" she said.") == "they are here she said");
    CHECK(normalize("well\xE2\x80\x94maybe") == "well maybe");
    CHECK(normalize("rock'n'roll") == "rocknroll");
    CHECK(normalize("state-of-the-art") == "stateoftheart");
}

TEST_CASE("normalize is idempotent") {
    std::mt19937 rng(5);
    const std::string alphabet = "abcXYZ '.,!?-\t\"";
    for (int i = 0; i < 2000; ++i) {
        const auto s = random_string(rng, alphabet, 40);
        const auto once = normalize(s);
        REQUIRE(normalize(once) == once);
    }
    for (const auto& [k, v] : ContractionTable::english().entries()) {
        const auto once = normalize(k);
        CHECK(once == v);
        CHECK(normalize(once) == once);
    }
}

TEST_CASE("built-in contraction table equals the data file") {
    const auto file = ContractionTable::load(std::filesystem::path(DATA_DIR) / "contractions.tsv");
    CHECK(file.entries() == ContractionTable::english().entries());
    CHECK(file.size() >= 45);
    REQUIRE(file.find("don't"));
    CHECK(*file.find("don't") == "do not");
    CHECK(file.find("nope") == nullptr);
}

TEST_CASE("contraction table parsing") {
    const auto t = ContractionTable::parse("# comment\n\nfoo's\tfoo is\nBar'd\tbar would\n");
    CHECK(t.size() == 2);
    REQUIRE(t.find("bar'd"));
    CHECK(normalize("Foo's ok", t) == "foo is ok");
    CHECK(normalize("(BAR'D)", t) == "bar would");
    CHECK_THROWS_AS(ContractionTable::parse("no tab here\n"), Error);
    CHECK_THROWS_AS(ContractionTable::load("/nonexistent/file.tsv"), Error);
}
