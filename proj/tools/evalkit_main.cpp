#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "streamscribe/streamscribe.h"

using nlohmann::json;

namespace {

struct Common {
    std::string manifest;
    std::string backend = "scripted";
    std::string endpoint;
    std::string backend_command;
    std::string backend_options = "{}";
    std::string language;
    std::string out;
    double seconds_per_audio_second = 0.0;
    long timeout_ms = 300000;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--manifest", c.manifest, "JSON Lines clip manifest")->required()->check(CLI::ExistingFile);
    cmd->add_option("--backend", c.backend, "scripted or external")
        ->check(CLI::IsMember({"scripted", "external"}));
    cmd->add_option("--endpoint", c.endpoint, "Service URL; an embedded service is started when omitted");
    cmd->add_option("--backend-command", c.backend_command, "Command line of the external backend");
    cmd->add_option("--backend-options", c.backend_options, "JSON object passed to the backend verbatim");
    cmd->add_option("--language", c.language, "Language hint for the external backend");
    cmd->add_option("--seconds-per-audio-second", c.seconds_per_audio_second,
                    "Simulated model cost of the scripted backend");
    cmd->add_option("--clip-timeout-ms", c.timeout_ms, "Per-clip timeout");
    cmd->add_option("--out", c.out, "Output JSON path (stdout when omitted)");
}

json config_of(const Common& c) {
    json j{{"backend", c.backend},
           {"seconds_per_audio_second", c.seconds_per_audio_second},
           {"clip_timeout_ms", c.timeout_ms}};
    if (!c.backend_command.empty()) j["backend_command"] = c.backend_command;
    j["backend_options"] = json::parse(c.backend_options);
    if (!c.language.empty()) j["language"] = c.language;
    return j;
}

// Starts an in-process service when no endpoint was given.
class EndpointScope {
public:
    explicit EndpointScope(const std::string& endpoint) : endpoint_(endpoint) {
        if (!endpoint_.empty()) return;
        int port = 0;
        if (ss_server_create("127.0.0.1", 0, &server_) != SS_OK || ss_server_start(server_, &port) != SS_OK) {
            throw std::runtime_error(std::string("cannot start embedded service: ") + ss_last_error());
        }
        endpoint_ = "http://127.0.0.1:" + std::to_string(port);
    }
    ~EndpointScope() {
        if (server_) {
            ss_server_stop(server_);
            ss_server_destroy(server_);
        }
    }
    const std::string& url() const { return endpoint_; }

private:
    std::string endpoint_;
    ss_server* server_ = nullptr;
};

void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text << '\n';
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int fail(ss_status st) {
    std::cerr << "error: " << ss_status_string(st) << ": " << ss_last_error() << '\n';
    return 1;
}

constexpr const char* kWords[] = {
    "river",  "stone",  "morning", "yellow", "garden", "window", "silver", "thunder", "paper",  "candle",
    "orange", "bridge", "winter",  "forest", "marble", "harbor", "violet", "copper",  "meadow", "lantern",
    "falcon", "pepper", "saddle",  "timber", "velvet", "walnut", "anchor", "blossom", "cactus", "dolphin",
    "ember",  "fable",  "glacier", "hollow", "island", "jungle", "kettle", "ladder",  "mirror", "nectar",
};

std::string random_sentence(std::mt19937& rng, std::size_t words) {
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kWords) - 1);
    std::string s;
    for (std::size_t i = 0; i < words; ++i) {
        if (!s.empty()) s += ' ';
        s += kWords[pick(rng)];
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming transcription evaluation"};
    app.require_subcommand(1);

    Common run_opts;
    double chunk_seconds = 4.0;
    int chunk_count = 5;
    auto* run = app.add_subcommand("run", "Evaluate one session configuration over a manifest");
    add_common(run, run_opts);
    run->add_option("--chunk-seconds", chunk_seconds, "Chunk length in seconds");
    run->add_option("--chunk-count", chunk_count, "Chunks held by the register");

    Common sweep_opts;
    std::vector<double> seconds_grid{2.0, 4.0, 6.0};
    std::vector<int> count_grid{3, 5, 15};
    std::string csv_path;
    auto* sw = app.add_subcommand("sweep", "Evaluate a chunk_seconds x chunk_count grid");
    add_common(sw, sweep_opts);
    sw->add_option("--chunk-seconds", seconds_grid, "Chunk lengths to test")->delimiter(',');
    sw->add_option("--chunk-count", count_grid, "Register sizes to test")->delimiter(',');
    sw->add_option("--csv", csv_path, "CSV matrix output path");

    std::string report_a, report_b, compare_out;
    auto* cmp = app.add_subcommand("compare", "Paired comparison of two reports");
    cmp->add_option("a", report_a, "First report")->required()->check(CLI::ExistingFile);
    cmp->add_option("b", report_b, "Second report")->required()->check(CLI::ExistingFile);
    cmp->add_option("--out", compare_out, "Output JSON path (stdout when omitted)");

    std::string synth_dir;
    int synth_clips = 3;
    double synth_duration = 20.0;
    double words_per_second = 2.5;
    int synth_rate = 16000;
    unsigned synth_seed = 1;
    auto* syn = app.add_subcommand("synth", "Write voiced synthetic clips and a manifest for the scripted backend");
    syn->add_option("--out-dir", synth_dir, "Output directory")->required();
    syn->add_option("--clips", synth_clips, "Number of clips");
    syn->add_option("--duration", synth_duration, "Clip length in seconds");
    syn->add_option("--words-per-second", words_per_second, "Reference speaking rate");
    syn->add_option("--sample-rate", synth_rate, "Sample rate")->check(CLI::IsMember({8000, 16000, 48000}));
    syn->add_option("--seed", synth_seed, "Random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            EndpointScope endpoint(run_opts.endpoint);
            auto config = config_of(run_opts);
            config["chunk_seconds"] = chunk_seconds;
            config["chunk_count"] = chunk_count;
            config["endpoint"] = endpoint.url();
            char* report = nullptr;
            const auto st = ss_eval_run(run_opts.manifest.c_str(), config.dump().c_str(), &report);
            if (st != SS_OK) return fail(st);
            emit(run_opts.out, report);
            ss_string_free(report);
        } else if (*sw) {
            EndpointScope endpoint(sweep_opts.endpoint);
            auto config = config_of(sweep_opts);
            config["chunk_seconds_grid"] = seconds_grid;
            config["chunk_count_grid"] = count_grid;
            config["endpoint"] = endpoint.url();
            char* js = nullptr;
            char* csv = nullptr;
            const auto st = ss_eval_sweep(sweep_opts.manifest.c_str(), config.dump().c_str(), &js, &csv);
            if (st != SS_OK) return fail(st);
            emit(sweep_opts.out, js);
            if (!csv_path.empty()) {
                std::ofstream(csv_path) << csv;
            } else if (!sweep_opts.out.empty()) {
                std::cout << csv;
            }
            ss_string_free(js);
            ss_string_free(csv);
        } else if (*cmp) {
            char* out = nullptr;
            const auto st = ss_eval_compare(slurp(report_a).c_str(), slurp(report_b).c_str(), &out);
            if (st != SS_OK) return fail(st);
            emit(compare_out, out);
            ss_string_free(out);
        } else if (*syn) {
            std::filesystem::create_directories(synth_dir);
            std::mt19937 rng(synth_seed);
            std::ofstream manifest(std::filesystem::path(synth_dir) / "manifest.jsonl");
            for (int i = 0; i < synth_clips; ++i) {
                const std::string id = "clip" + std::to_string(i);
                const std::string wav = id + ".wav";
                const auto st = ss_eval_synth((std::filesystem::path(synth_dir) / wav).c_str(), synth_duration,
                                              synth_rate, synth_seed + static_cast<unsigned>(i));
                if (st != SS_OK) return fail(st);
                const auto words = static_cast<std::size_t>(std::max(1.0, synth_duration * words_per_second));
                manifest << json{{"clip_id", id},
                                 {"audio_path", wav},
                                 {"reference_text", random_sentence(rng, words)},
                                 {"duration_seconds", synth_duration}}
                                .dump()
                         << '\n';
            }
            std::cout << "wrote " << synth_clips << " clips to " << synth_dir << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
