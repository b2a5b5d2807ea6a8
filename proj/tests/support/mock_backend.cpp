// Stand-in transcription backend speaking the stdio line protocol.
//
//   mock_backend [--mode M] [--log FILE] [--delay-ms N] [--crash-after N] [--vad-time S]
//
// Modes: echo (default), error, garbage, wrong-id, hang, crash, no-handshake,
// bad-handshake, repeat. echo answers with the byte count and an FNV-1a hash
// of the decoded PCM so callers can check the audio arrived bit-exact.

#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "json.hpp"

#include "streamscribe/pcm.hpp"

using nlohmann::json;

namespace {

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    std::string mode = "echo";
    std::string log_path;
    int delay_ms = 0;
    long crash_after = -1;
    double vad_time = -1.0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&]() -> std::string { return i + 1 < argc ? argv[++i] : ""; };
        if (arg == "--mode") mode = next();
        else if (arg == "--log") log_path = next();
        else if (arg == "--delay-ms") delay_ms = std::stoi(next());
        else if (arg == "--crash-after") crash_after = std::stol(next());
        else if (arg == "--vad-time") vad_time = std::stod(next());
    }

    if (mode == "no-handshake") {
        std::this_thread::sleep_for(std::chrono::seconds(60));
        return 0;
    }
    if (mode == "bad-handshake") {
        std::cout << "hello" << std::endl;
        std::this_thread::sleep_for(std::chrono::seconds(60));
        return 0;
    }
    std::cout << json{{"ready", true}, {"backend", "mock-" + mode}}.dump() << std::endl;

    std::ofstream log;
    if (!log_path.empty()) log.open(log_path, std::ios::app);

    long served = 0;
    std::string line;
    while (std::getline(std::cin, line)) {
        if (log.is_open()) log << line << std::endl;
        if (mode == "crash" || (crash_after >= 0 && served >= crash_after)) _exit(3);
        ++served;
        const json req = json::parse(line, nullptr, false);
        const std::int64_t id = !req.is_discarded() && req.contains("id") ? req["id"].get<std::int64_t>() : -1;
        if (mode == "hang") continue;
        if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
        if (mode == "garbage") {
            std::cout << "}{ not json" << std::endl;
            continue;
        }
        if (mode == "error" || req.is_discarded()) {
            std::cout << json{{"id", id}, {"error", "mock failure"}}.dump() << std::endl;
            continue;
        }
        std::string pcm;
        try {
            pcm = streamscribe::base64_decode(req.at("audio").get<std::string>());
        } catch (const std::exception& e) {
            std::cout << json{{"id", id}, {"error", std::string("decode: ") + e.what()}}.dump() << std::endl;
            continue;
        }
        const int rate = req.value("sample_rate", 16000);
        const double seconds = rate > 0 ? static_cast<double>(pcm.size() / 2) / rate : 0.0;
        std::string text;
        if (mode == "repeat") {
            text = "hello";
            for (int k = 0; k < 7; ++k) text += " thank you";
        } else {
            std::ostringstream t;
            t << "bytes " << pcm.size() << " hash " << fnv1a_hex(pcm);
            text = t.str();
        }
        json resp{{"id", mode == "wrong-id" ? id + 1000 : id},
                  {"text", text},
                  {"segments", json::array({json::array({0.0, seconds, text})})},
                  {"model_time", delay_ms / 1000.0}};
        if (vad_time >= 0.0) resp["vad_time"] = vad_time;
        std::cout << resp.dump() << std::endl;
    }
    return 0;
}
