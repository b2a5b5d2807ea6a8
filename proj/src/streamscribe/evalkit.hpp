#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "streamscribe/metrics.hpp"

namespace streamscribe {

// One JSON object per manifest line:
//   {"clip_id":"...","audio_path":"...","reference_text":"...","duration_seconds":x[,"timeline":[[mid,word],...]]}
// Relative audio paths resolve against the manifest's directory.
struct ClipManifestEntry {
    std::string clip_id;
    std::filesystem::path audio_path;
    std::string reference_text;
    double duration_seconds = 0.0;
    std::optional<nlohmann::json> timeline;
};

ClipManifestEntry parse_manifest_line(const std::string& line, const std::filesystem::path& base_dir = {});
std::vector<ClipManifestEntry> load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ClipManifestEntry>& entries);

struct EvalConfig {
    double chunk_seconds = 4.0;
    int chunk_count = 5;
    std::string backend = "scripted";  // scripted | external
    std::string endpoint = "http://127.0.0.1:8080";
    // external backend only
    nlohmann::json backend_command;  // argv array or command string
    nlohmann::json backend_options = nlohmann::json::object();
    std::optional<std::string> language;
    bool backend_vad = true;
    // scripted backend only: simulated model seconds per audio second
    double seconds_per_audio_second = 0.0;
    nlohmann::json vad = nlohmann::json::object();
    int fallback_sample_rate = 16000;
    std::chrono::milliseconds clip_timeout{300000};
};

struct ClipTimings {
    double pre_vad = 0.0;
    double vad = 0.0;
    double trx = 0.0;
    double suggestion = 0.0;
    double total = 0.0;
};

struct ClipResult {
    std::string clip_id;
    double duration_seconds = 0.0;
    bool ok = false;
    std::string error;
    std::string hypothesis;
    double wer = 0.0;
    double word_accuracy = 0.0;
    std::size_t text_events = 0;  // events carrying timings (text or filtered)
    std::size_t events = 0;
    ClipTimings mean_timing;
};

struct DatasetSummary {
    std::size_t clips = 0;
    std::size_t scored = 0;
    double total_duration_seconds = 0.0;
    WeightedStat wer;
    WeightedStat word_accuracy;
    WeightedStat pre_vad;
    WeightedStat vad;
    WeightedStat trx;
    WeightedStat suggestion;
    WeightedStat total;
};

struct EvalReport {
    EvalConfig config;
    std::vector<ClipResult> per_clip;
    DatasetSummary dataset;
};

// Duration-weighted aggregates over successfully scored clips. Timing
// aggregates only use clips with at least one timed event.
DatasetSummary summarize(const std::vector<ClipResult>& per_clip);

// One session per clip: warmup with unpaced file replay of the padded clip,
// collect events over a line stream, stop, then score. Per-clip failures are
// recorded and the run continues.
ClipResult evaluate_clip(const ClipManifestEntry& clip, const EvalConfig& config);
EvalReport run_eval(const std::vector<ClipManifestEntry>& manifest, const EvalConfig& config);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

struct SweepCell {
    double chunk_seconds = 0.0;
    int chunk_count = 0;
    std::optional<EvalReport> report;
    std::string error;
};

std::vector<SweepCell> sweep(const std::vector<ClipManifestEntry>& manifest, const EvalConfig& base,
                             const std::vector<double>& chunk_seconds, const std::vector<int>& chunk_counts);
nlohmann::json sweep_to_json(const std::vector<SweepCell>& cells);
// Columns: chunk_seconds,chunk_count,weighted_wer,weighted_latency,scored_clips,error
std::string sweep_csv(const std::vector<SweepCell>& cells);

struct ClipPair {
    std::string clip_id;
    double a = 0.0;  // word accuracy
    double b = 0.0;
};

struct Comparison {
    std::vector<ClipPair> pairs;
    double mean_rank_a = 0.0;
    double mean_rank_b = 0.0;
    WilcoxonResult wilcoxon;  // on a - b
};

// Pairs scored clips by clip_id. Throws Error(invalid_argument) naming the
// ids missing from either side.
Comparison compare(const EvalReport& a, const EvalReport& b);
nlohmann::json comparison_to_json(const Comparison& c);

// Writes a voiced test clip (tone plus noise, never silent) of the given
// duration as a 16-bit mono WAV.
void write_synthetic_clip(const std::filesystem::path& path, double duration_seconds, int sample_rate,
                          unsigned seed = 1);

}  // namespace streamscribe
