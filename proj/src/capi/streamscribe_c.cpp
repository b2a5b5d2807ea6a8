#include "streamscribe/streamscribe.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "json.hpp"

#include "streamscribe/error.hpp"
#include "streamscribe/evalkit.hpp"
#include "streamscribe/register.hpp"
#include "streamscribe/service.hpp"
#include "streamscribe/text.hpp"
#include "streamscribe/vad.hpp"

using nlohmann::json;
namespace ss = streamscribe;

struct ss_register {
    ss::ShiftingRegister impl;
};

struct ss_server {
    ss::TranscriptionService impl;
};

namespace {

thread_local std::string last_error;

ss_status status_of(ss::ErrorCode code) {
    switch (code) {
        case ss::ErrorCode::invalid_argument: return SS_ERR_INVALID_ARGUMENT;
        case ss::ErrorCode::config: return SS_ERR_CONFIG;
        case ss::ErrorCode::size: return SS_ERR_SIZE;
        case ss::ErrorCode::sequence: return SS_ERR_SEQUENCE;
        case ss::ErrorCode::io: return SS_ERR_IO;
        case ss::ErrorCode::address_in_use: return SS_ERR_ADDRESS_IN_USE;
        case ss::ErrorCode::backend: return SS_ERR_BACKEND;
        case ss::ErrorCode::backend_timeout: return SS_ERR_BACKEND_TIMEOUT;
        case ss::ErrorCode::backend_protocol: return SS_ERR_BACKEND_PROTOCOL;
        case ss::ErrorCode::backend_crashed: return SS_ERR_BACKEND_CRASHED;
        case ss::ErrorCode::invalid_state: return SS_ERR_INVALID_STATE;
        case ss::ErrorCode::not_found: return SS_ERR_NOT_FOUND;
    }
    return SS_ERR_INTERNAL;
}

template <typename F>
ss_status guarded(F&& f) {
    try {
        f();
        last_error.clear();
        return SS_OK;
    } catch (const ss::Error& e) {
        last_error = e.what();
        return status_of(e.code());
    } catch (const json::exception& e) {
        last_error = e.what();
        return SS_ERR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        last_error = e.what();
        return SS_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown exception";
        return SS_ERR_INTERNAL;
    }
}

void require(bool condition, const char* message) {
    if (!condition) throw ss::Error(ss::ErrorCode::invalid_argument, message);
}

char* dup_string(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ss::RegisterConfig register_config(int chunk_count, double chunk_seconds, int sample_rate) {
    ss::RegisterConfig c;
    c.chunk_count = chunk_count;
    c.chunk_seconds = chunk_seconds;
    c.sample_rate = sample_rate;
    c.validate();
    return c;
}

ss::EvalConfig eval_config(const char* config_json) {
    ss::EvalConfig c;
    if (!config_json || !*config_json) return c;
    const json j = json::parse(config_json);
    require(j.is_object(), "config must be a JSON object");
    c.chunk_seconds = j.value("chunk_seconds", c.chunk_seconds);
    c.chunk_count = j.value("chunk_count", c.chunk_count);
    c.backend = j.value("backend", c.backend);
    require(c.backend == "scripted" || c.backend == "external", "backend must be scripted or external");
    c.endpoint = j.value("endpoint", c.endpoint);
    if (j.contains("backend_command")) c.backend_command = j["backend_command"];
    if (j.contains("backend_options")) c.backend_options = j["backend_options"];
    if (j.contains("language") && j["language"].is_string()) c.language = j["language"].get<std::string>();
    c.backend_vad = j.value("backend_vad", c.backend_vad);
    c.seconds_per_audio_second = j.value("seconds_per_audio_second", c.seconds_per_audio_second);
    if (j.contains("vad")) c.vad = j["vad"];
    c.fallback_sample_rate = j.value("sample_rate", c.fallback_sample_rate);
    if (j.contains("clip_timeout_ms")) c.clip_timeout = std::chrono::milliseconds(j["clip_timeout_ms"].get<long>());
    return c;
}

}  // namespace

extern "C" {

const char* ss_status_string(ss_status status) {
    switch (status) {
        case SS_OK: return "ok";
        case SS_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case SS_ERR_CONFIG: return "config";
        case SS_ERR_SIZE: return "size";
        case SS_ERR_SEQUENCE: return "sequence";
        case SS_ERR_IO: return "io";
        case SS_ERR_ADDRESS_IN_USE: return "address_in_use";
        case SS_ERR_BACKEND: return "backend";
        case SS_ERR_BACKEND_TIMEOUT: return "backend_timeout";
        case SS_ERR_BACKEND_PROTOCOL: return "backend_protocol";
        case SS_ERR_BACKEND_CRASHED: return "backend_crashed";
        case SS_ERR_INVALID_STATE: return "invalid_state";
        case SS_ERR_NOT_FOUND: return "not_found";
        case SS_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* ss_last_error(void) { return last_error.c_str(); }

void ss_string_free(char* s) { std::free(s); }

ss_status ss_register_capacity(int chunk_count, double chunk_seconds, int sample_rate, uint64_t* out) {
    return guarded([&] {
        require(out, "out is null");
        *out = ss::capacity_samples(register_config(chunk_count, chunk_seconds, sample_rate));
    });
}

ss_status ss_register_create(int chunk_count, double chunk_seconds, int sample_rate, ss_register** out) {
    return guarded([&] {
        require(out, "out is null");
        *out = new ss_register{ss::ShiftingRegister(register_config(chunk_count, chunk_seconds, sample_rate))};
    });
}

void ss_register_destroy(ss_register* reg) { delete reg; }

ss_status ss_register_push(ss_register* reg, const float* samples, size_t n) {
    return guarded([&] {
        require(reg && (samples || n == 0), "null argument");
        reg->impl.push(std::span<const float>(samples, n));
    });
}

ss_status ss_register_flush(ss_register* reg) {
    return guarded([&] {
        require(reg, "reg is null");
        reg->impl.flush();
    });
}

ss_status ss_register_size(const ss_register* reg, size_t* chunks, size_t* samples) {
    return guarded([&] {
        require(reg, "reg is null");
        if (chunks) *chunks = reg->impl.size();
        if (samples) *samples = reg->impl.stored_samples();
    });
}

ss_status ss_register_appended_total(const ss_register* reg, uint64_t* out) {
    return guarded([&] {
        require(reg && out, "null argument");
        *out = reg->impl.appended_total();
    });
}

ss_status ss_register_snapshot(const ss_register* reg, float* out, size_t capacity, size_t* written) {
    return guarded([&] {
        require(reg && written, "null argument");
        const auto snap = reg->impl.snapshot();
        if (snap.samples.size() > capacity) {
            *written = snap.samples.size();
            throw ss::Error(ss::ErrorCode::size, "output buffer too small");
        }
        if (!snap.samples.empty()) std::memcpy(out, snap.samples.data(), snap.samples.size() * sizeof(float));
        *written = snap.samples.size();
    });
}

ss_status ss_has_voice(const float* samples, size_t n, int sample_rate, int frame_ms, double energy_threshold,
                       int min_voiced_frames, int* out) {
    return guarded([&] {
        require(out && (samples || n == 0), "null argument");
        ss::VadConfig c;
        c.frame_ms = frame_ms;
        c.energy_threshold = energy_threshold;
        c.min_voiced_frames = min_voiced_frames;
        *out = ss::has_voice(std::span<const float>(samples, n), sample_rate, c) ? 1 : 0;
    });
}

ss_status ss_levenshtein(const char* a, const char* b, size_t* out) {
    return guarded([&] {
        require(a && b && out, "null argument");
        *out = ss::levenshtein(a, b);
    });
}

ss_status ss_normalize(const char* text, char** out) {
    return guarded([&] {
        require(text && out, "null argument");
        *out = dup_string(ss::normalize(text));
    });
}

ss_status ss_suggestion(const char* new_trx, const char* prev_trx, char** out) {
    return guarded([&] {
        require(new_trx && prev_trx && out, "null argument");
        *out = dup_string(ss::generate_suggestion(new_trx, prev_trx).text);
    });
}

ss_status ss_wer(const char* reference, const char* hypothesis, double* out) {
    return guarded([&] {
        require(reference && hypothesis && out, "null argument");
        *out = ss::wer(reference, hypothesis);
    });
}

ss_status ss_server_create(const char* host, int port, ss_server** out) {
    return guarded([&] {
        require(out, "out is null");
        require(port <= 65535, "port out of range");
        ss::ServiceOptions options;
        if (host && *host) options.host = host;
        options.port = port < 0 ? ss::port_from_environment() : port;
        *out = new ss_server{ss::TranscriptionService(options)};
    });
}

ss_status ss_server_start(ss_server* server, int* bound_port) {
    return guarded([&] {
        require(server, "server is null");
        const int port = server->impl.start_background();
        if (bound_port) *bound_port = port;
    });
}

ss_status ss_server_serve(ss_server* server) {
    return guarded([&] {
        require(server, "server is null");
        server->impl.serve();
    });
}

void ss_server_stop(ss_server* server) {
    if (server) server->impl.shutdown();
}

void ss_server_destroy(ss_server* server) { delete server; }

ss_status ss_eval_run(const char* manifest_path, const char* config_json, char** report_json) {
    return guarded([&] {
        require(manifest_path && report_json, "null argument");
        const auto config = eval_config(config_json);
        const auto manifest = ss::load_manifest(manifest_path);
        *report_json = dup_string(ss::report_to_json(ss::run_eval(manifest, config)).dump(2));
    });
}

ss_status ss_eval_sweep(const char* manifest_path, const char* config_json, char** sweep_json, char** sweep_csv) {
    return guarded([&] {
        require(manifest_path && sweep_json, "null argument");
        const auto config = eval_config(config_json);
        std::vector<double> seconds{2.0, 4.0, 6.0};
        std::vector<int> counts{3, 5, 15};
        if (config_json && *config_json) {
            const json j = json::parse(config_json);
            if (j.contains("chunk_seconds_grid")) seconds = j["chunk_seconds_grid"].get<std::vector<double>>();
            if (j.contains("chunk_count_grid")) counts = j["chunk_count_grid"].get<std::vector<int>>();
        }
        const auto manifest = ss::load_manifest(manifest_path);
        const auto cells = ss::sweep(manifest, config, seconds, counts);
        char* js = dup_string(ss::sweep_to_json(cells).dump(2));
        if (sweep_csv) {
            try {
                *sweep_csv = dup_string(ss::sweep_csv(cells));
            } catch (...) {
                std::free(js);
                throw;
            }
        }
        *sweep_json = js;
    });
}

ss_status ss_eval_compare(const char* report_a_json, const char* report_b_json, char** comparison_json) {
    return guarded([&] {
        require(report_a_json && report_b_json && comparison_json, "null argument");
        const auto a = ss::report_from_json(json::parse(report_a_json));
        const auto b = ss::report_from_json(json::parse(report_b_json));
        *comparison_json = dup_string(ss::comparison_to_json(ss::compare(a, b)).dump(2));
    });
}

ss_status ss_eval_synth(const char* wav_path, double duration_seconds, int sample_rate, unsigned seed) {
    return guarded([&] {
        require(wav_path, "null argument");
        ss::write_synthetic_clip(wav_path, duration_seconds, sample_rate, seed);
    });
}

}  // extern "C"
