#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "streamscribe/streamscribe.h"
#include "test_util.hpp"

using nlohmann::json;

namespace {

std::string take(char* s) {
    std::string out = s ? s : "";
    ss_string_free(s);
    return out;
}

}  // namespace

TEST_CASE("status strings") {
    CHECK(std::string(ss_status_string(SS_OK)) == "ok");
    CHECK(std::string(ss_status_string(SS_ERR_ADDRESS_IN_USE)) == "address_in_use");
    CHECK(std::string(ss_status_string(SS_ERR_BACKEND_CRASHED)) == "backend_crashed");
}

TEST_CASE("register through the C API") {
    uint64_t cap = 0;
    REQUIRE(ss_register_capacity(5, 4.0, 16000, &cap) == SS_OK);
    CHECK(cap == 320000);
    CHECK(ss_register_capacity(0, 4.0, 16000, &cap) == SS_ERR_CONFIG);
    CHECK(std::strlen(ss_last_error()) > 0);
    CHECK(ss_register_capacity(5, 4.0, 16000, nullptr) == SS_ERR_INVALID_ARGUMENT);

    ss_register* reg = nullptr;
    REQUIRE(ss_register_create(3, 0.5, 8000, &reg) == SS_OK);
    std::vector<float> chunk(4000);
    for (int k = 0; k < 5; ++k) {
        std::fill(chunk.begin(), chunk.end(), static_cast<float>(k));
        REQUIRE(ss_register_push(reg, chunk.data(), chunk.size()) == SS_OK);
    }
    CHECK(ss_register_push(reg, chunk.data(), 10) == SS_ERR_SIZE);
    size_t chunks = 0, samples = 0;
    REQUIRE(ss_register_size(reg, &chunks, &samples) == SS_OK);
    CHECK(chunks == 3);
    CHECK(samples == 12000);
    uint64_t total = 0;
    REQUIRE(ss_register_appended_total(reg, &total) == SS_OK);
    CHECK(total == 5);

    std::vector<float> out(100);
    size_t written = 0;
    CHECK(ss_register_snapshot(reg, out.data(), out.size(), &written) == SS_ERR_SIZE);
    CHECK(written == 12000);
    out.resize(written);
    REQUIRE(ss_register_snapshot(reg, out.data(), out.size(), &written) == SS_OK);
    CHECK(out.front() == 2.0f);
    CHECK(out[4000] == 3.0f);
    CHECK(out.back() == 4.0f);

    REQUIRE(ss_register_flush(reg) == SS_OK);
    REQUIRE(ss_register_size(reg, &chunks, nullptr) == SS_OK);
    CHECK(chunks == 0);
    ss_register_destroy(reg);
}

TEST_CASE("voice detection through the C API") {
    const auto voiced = testutil::voiced(16000);
    const auto quiet = testutil::silence(16000);
    int out = -1;
    REQUIRE(ss_has_voice(voiced.data(), voiced.size(), 16000, 30, 0.01, 3, &out) == SS_OK);
    CHECK(out == 1);
    REQUIRE(ss_has_voice(quiet.data(), quiet.size(), 16000, 30, 0.01, 3, &out) == SS_OK);
    CHECK(out == 0);
    CHECK(ss_has_voice(voiced.data(), voiced.size(), 16000, 0, 0.01, 3, &out) == SS_ERR_CONFIG);
}

TEST_CASE("text functions through the C API") {
    size_t d = 0;
    REQUIRE(ss_levenshtein("kitten", "sitting", &d) == SS_OK);
    CHECK(d == 3);
    char* s = nullptr;
    REQUIRE(ss_normalize("Don't STOP, now!", &s) == SS_OK);
    CHECK(take(s) == "do not stop now");
    REQUIRE(ss_suggestion("the quick brown fox jumps", "the quick brown", &s) == SS_OK);
    CHECK(take(s) == "fox jumps");
    double w = -1;
    REQUIRE(ss_wer("a b c d", "a b", &w) == SS_OK);
    CHECK(w == doctest::Approx(0.5));
    CHECK(ss_wer("", "a", &w) == SS_ERR_INVALID_ARGUMENT);
    CHECK(ss_levenshtein(nullptr, "a", &d) == SS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("server and evaluation through the C API") {
    ss_server* server = nullptr;
    REQUIRE(ss_server_create("127.0.0.1", 0, &server) == SS_OK);
    int port = 0;
    REQUIRE(ss_server_start(server, &port) == SS_OK);
    REQUIRE(port > 0);
    {
        httplib::Client cli("127.0.0.1", port);
        auto res = cli.Get("/health");
        REQUIRE(res);
        CHECK(res->status == 200);
    }
    ss_server* clash = nullptr;
    REQUIRE(ss_server_create("127.0.0.1", port, &clash) == SS_OK);
    CHECK(ss_server_start(clash, nullptr) == SS_ERR_ADDRESS_IN_USE);
    ss_server_destroy(clash);

    testutil::TempDir dir;
    const std::string text = "morning coffee near the old stone bridge";
    REQUIRE(ss_eval_synth((dir / "a.wav").c_str(), 6.0, 16000, 1) == SS_OK);
    REQUIRE(ss_eval_synth((dir / "b.wav").c_str(), 9.0, 16000, 2) == SS_OK);
    {
        std::ofstream m(dir / "m.jsonl");
        m << json{{"clip_id", "a"}, {"audio_path", "a.wav"}, {"reference_text", text}, {"duration_seconds", 6.0}}.dump()
          << '\n'
          << json{{"clip_id", "b"}, {"audio_path", "b.wav"}, {"reference_text", text}, {"duration_seconds", 9.0}}.dump()
          << '\n';
    }
    const json config{{"endpoint", "http://127.0.0.1:" + std::to_string(port)}, {"chunk_seconds", 2.0}, {"chunk_count", 3}};
    char* report = nullptr;
    REQUIRE(ss_eval_run((dir / "m.jsonl").c_str(), config.dump().c_str(), &report) == SS_OK);
    const auto r = json::parse(take(report));
    CHECK(r["dataset"]["scored"] == 2);
    CHECK(r["dataset"]["weighted_wer"]["mean"] == 0.0);

    auto grid = config;
    grid["chunk_seconds_grid"] = {2.0, 3.0};
    grid["chunk_count_grid"] = {3};
    char* js = nullptr;
    char* csv = nullptr;
    REQUIRE(ss_eval_sweep((dir / "m.jsonl").c_str(), grid.dump().c_str(), &js, &csv) == SS_OK);
    CHECK(json::parse(take(js)).size() == 2);
    CHECK(take(csv).rfind("chunk_seconds,chunk_count,", 0) == 0);

    char* cmp = nullptr;
    const auto rs = r.dump();
    REQUIRE(ss_eval_compare(rs.c_str(), rs.c_str(), &cmp) == SS_OK);
    CHECK(json::parse(take(cmp))["wilcoxon"]["p_undefined"] == true);
    CHECK(ss_eval_compare("{", rs.c_str(), &cmp) == SS_ERR_INVALID_ARGUMENT);
    CHECK(ss_eval_run((dir / "none.jsonl").c_str(), nullptr, &report) == SS_ERR_IO);
    CHECK(ss_eval_run((dir / "m.jsonl").c_str(), R"({"backend":"quantum"})", &report) == SS_ERR_INVALID_ARGUMENT);

    ss_server_stop(server);
    ss_server_destroy(server);
}
