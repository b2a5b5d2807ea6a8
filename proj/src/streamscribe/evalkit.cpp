#include "streamscribe/evalkit.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"

#include "streamscribe/error.hpp"
#include "streamscribe/events.hpp"
#include "streamscribe/pcm.hpp"

namespace streamscribe {

using nlohmann::json;

ClipManifestEntry parse_manifest_line(const std::string& line, const std::filesystem::path& base_dir) {
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::invalid_argument, "manifest line is not a JSON object");
    try {
        ClipManifestEntry e;
        e.clip_id = j.at("clip_id").get<std::string>();
        e.audio_path = j.at("audio_path").get<std::string>();
        if (e.audio_path.is_relative() && !base_dir.empty()) e.audio_path = base_dir / e.audio_path;
        e.reference_text = j.at("reference_text").get<std::string>();
        e.duration_seconds = j.value("duration_seconds", 0.0);
        if (j.contains("timeline")) e.timeline = j["timeline"];
        if (e.clip_id.empty()) throw Error(ErrorCode::invalid_argument, "clip_id is empty");
        return e;
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::invalid_argument, std::string("bad manifest entry: ") + ex.what());
    }
}

std::vector<ClipManifestEntry> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open manifest " + path.string());
    std::vector<ClipManifestEntry> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_manifest_line(line, path.parent_path()));
        } catch (const Error& e) {
            throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!seen.insert(out.back().clip_id).second) {
            throw Error(ErrorCode::invalid_argument, "duplicate clip_id " + out.back().clip_id);
        }
    }
    return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ClipManifestEntry>& entries) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot write manifest " + path.string());
    for (const auto& e : entries) {
        json j{{"clip_id", e.clip_id},
               {"audio_path", e.audio_path.string()},
               {"reference_text", e.reference_text},
               {"duration_seconds", e.duration_seconds}};
        if (e.timeline) j["timeline"] = *e.timeline;
        out << j.dump() << '\n';
    }
}

namespace {

// Accepts line-stream connections on 127.0.0.1 and collects the events.
class EventCollector {
public:
    EventCollector() {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
        if (listen_fd_ < 0) throw Error(ErrorCode::io, "socket() failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        socklen_t len = sizeof addr;
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 4) != 0 ||
            ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
            ::close(listen_fd_);
            throw Error(ErrorCode::io, "cannot listen for events");
        }
        port_ = ntohs(addr.sin_port);
        thread_ = std::thread([this] { loop(); });
    }
    ~EventCollector() {
        stop_.store(true);
        thread_.join();
        ::close(listen_fd_);
    }

    int port() const { return port_; }

    bool wait_for(std::size_t count, std::chrono::milliseconds timeout) {
        std::unique_lock lock(mutex_);
        return cv_.wait_for(lock, timeout, [&] { return events_.size() >= count; });
    }

    std::vector<TranscriptEvent> events() const {
        std::lock_guard lock(mutex_);
        return events_;
    }

private:
    void loop() {
        int client = -1;
        std::string buffer;
        while (!stop_.load()) {
            pollfd fds[2] = {{listen_fd_, POLLIN, 0}, {client, POLLIN, 0}};
            if (::poll(fds, client >= 0 ? 2 : 1, 20) <= 0) continue;
            if (fds[0].revents & POLLIN) {
                const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
                if (fd >= 0) {
                    if (client >= 0) ::close(client);
                    client = fd;
                    buffer.clear();
                }
                continue;
            }
            if (client >= 0 && (fds[1].revents & (POLLIN | POLLHUP | POLLERR))) {
                char chunk[4096];
                const auto n = ::recv(client, chunk, sizeof chunk, 0);
                if (n <= 0) {
                    ::close(client);
                    client = -1;
                    continue;
                }
                buffer.append(chunk, static_cast<std::size_t>(n));
                std::size_t nl;
                while ((nl = buffer.find('\n')) != std::string::npos) {
                    const std::string line = buffer.substr(0, nl);
                    buffer.erase(0, nl + 1);
                    const json j = json::parse(line, nullptr, false);
                    if (j.is_discarded()) continue;
                    try {
                        auto e = event_from_json(j);
                        std::lock_guard lock(mutex_);
                        events_.push_back(std::move(e));
                    } catch (const Error&) {
                        continue;
                    }
                    cv_.notify_all();
                }
            }
        }
        if (client >= 0) ::close(client);
    }

    int listen_fd_ = -1;
    int port_ = 0;
    std::atomic<bool> stop_{false};
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::vector<TranscriptEvent> events_;
    std::thread thread_;
};

struct TempFile {
    std::filesystem::path path;
    ~TempFile() {
        std::error_code ec;
        if (!path.empty()) std::filesystem::remove(path, ec);
    }
};

std::filesystem::path temp_wav_path(const std::string& clip_id) {
    static std::atomic<unsigned> counter{0};
    std::string safe;
    for (char c : clip_id) safe += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    return std::filesystem::temp_directory_path() /
           ("streamscribe-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + safe + ".wav");
}

json post(httplib::Client& client, const std::string& path, const json& body) {
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) throw Error(ErrorCode::io, "POST " + path + " failed: " + httplib::to_string(res.error()));
    json j = json::parse(res->body, nullptr, false);
    if (res->status != 200) {
        const std::string msg = !j.is_discarded() && j.contains("error") ? j["error"].get<std::string>() : res->body;
        throw Error(ErrorCode::io, "POST " + path + " returned " + std::to_string(res->status) + ": " + msg);
    }
    if (j.is_discarded()) throw Error(ErrorCode::io, "POST " + path + " returned invalid JSON");
    return j;
}

json get_status(httplib::Client& client, const std::string& session_id) {
    auto res = client.Get("/status?session_id=" + session_id);
    if (!res || res->status != 200) throw Error(ErrorCode::io, "GET /status failed");
    return json::parse(res->body);
}

json transcriber_block(const ClipManifestEntry& clip, const EvalConfig& config, double clip_seconds) {
    json t;
    t["backend"] = config.backend;
    if (config.backend == "scripted") {
        if (clip.timeline) {
            t["timeline"] = *clip.timeline;
        } else {
            t["script_text"] = clip.reference_text;
            t["script_start"] = 0.0;
            t["script_end"] = clip_seconds;
        }
        t["seconds_per_audio_second"] = config.seconds_per_audio_second;
    } else {
        t["backend_command"] = config.backend_command;
        t["backend_options"] = config.backend_options;
        t["vad_enabled"] = config.backend_vad;
        if (config.language) t["language"] = *config.language;
    }
    return t;
}

}  // namespace

ClipResult evaluate_clip(const ClipManifestEntry& clip, const EvalConfig& config) {
    ClipResult r;
    r.clip_id = clip.clip_id;
    r.duration_seconds = clip.duration_seconds;
    try {
        if (tokenize(normalize(clip.reference_text)).empty()) {
            throw Error(ErrorCode::invalid_argument, "reference is empty after normalization");
        }
        const auto audio = read_audio_file(clip.audio_path, config.fallback_sample_rate);
        if (r.duration_seconds <= 0.0) r.duration_seconds = audio.duration_seconds();

        TempFile wav{temp_wav_path(clip.clip_id)};
        write_wav(wav.path, {pad_trailing_silence(audio.samples, audio.sample_rate, config.chunk_seconds),
                             audio.sample_rate});

        EventCollector collector;
        httplib::Client client(config.endpoint);
        if (!client.is_valid()) throw Error(ErrorCode::config, "invalid endpoint " + config.endpoint);
        client.set_connection_timeout(std::chrono::seconds(5));
        client.set_read_timeout(std::chrono::seconds(60));

        json warmup;
        warmup["input"] = {{"mode", "file_replay"},
                           {"replay_path", wav.path.string()},
                           {"replay_pacing", "unpaced"},
                           {"sample_rate", audio.sample_rate}};
        warmup["register"] = {{"chunk_seconds", config.chunk_seconds}, {"chunk_count", config.chunk_count}};
        warmup["vad"] = config.vad;
        warmup["transcriber"] = transcriber_block(clip, config, audio.duration_seconds());
        warmup["output"] = {{"kind", "line_stream"}, {"target", "127.0.0.1:" + std::to_string(collector.port())}};
        const std::string id = post(client, "/warmup", warmup).at("session_id").get<std::string>();
        post(client, "/start", {{"session_id", id}});

        const auto deadline = std::chrono::steady_clock::now() + config.clip_timeout;
        for (;;) {
            const json status = get_status(client, id);
            if (status.value("state", "") == "errored") {
                throw Error(ErrorCode::backend, status.value("error", std::string("session errored")));
            }
            const auto& p = status.at("progress");
            if (p.at("ingest_finished").get<bool>() &&
                p.at("last_processed_seq").get<std::int64_t>() + 1 == p.at("chunks_appended").get<std::int64_t>()) {
                break;
            }
            if (std::chrono::steady_clock::now() > deadline) {
                post(client, "/stop", {{"session_id", id}});
                throw Error(ErrorCode::backend_timeout, "clip did not finish within the timeout");
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
        const json stopped = post(client, "/stop", {{"session_id", id}});
        const auto& stats = stopped.at("stats");
        const auto emitted = stats.at("events").get<std::size_t>();
        collector.wait_for(emitted, std::chrono::seconds(5));

        auto events = collector.events();
        std::stable_sort(events.begin(), events.end(),
                         [](const auto& a, const auto& b) { return a.chunk_seq < b.chunk_seq; });
        r.events = emitted;
        if (events.size() == emitted) {
            r.hypothesis = assemble_transcript(events);
            for (const auto& e : events) {
                if (e.status != EventStatus::text && e.status != EventStatus::filtered) continue;
                ++r.text_events;
                r.mean_timing.pre_vad += e.timing.pre_vad_seconds;
                r.mean_timing.vad += e.timing.vad_seconds;
                r.mean_timing.trx += e.timing.trx_seconds;
                r.mean_timing.suggestion += e.timing.suggestion_seconds;
                r.mean_timing.total += e.timing.total_seconds;
            }
            if (r.text_events > 0) {
                const double n = static_cast<double>(r.text_events);
                r.mean_timing = {r.mean_timing.pre_vad / n, r.mean_timing.vad / n, r.mean_timing.trx / n,
                                 r.mean_timing.suggestion / n, r.mean_timing.total / n};
            }
        } else {
            // Some events never reached the collector; fall back to the
            // service's own summary.
            r.hypothesis = stats.at("transcript").get<std::string>();
            r.text_events = stats.at("timing").at("count").get<std::size_t>();
            const auto& m = stats.at("timing").at("mean");
            r.mean_timing = {m.at("pre_vad").get<double>(), m.at("vad").get<double>(), m.at("trx").get<double>(),
                             m.at("suggestion").get<double>(), m.at("total").get<double>()};
        }
        if (stats.at("error_events").get<std::size_t>() > 0) {
            r.error = std::to_string(stats.at("error_events").get<std::size_t>()) + " backend error event(s)";
        }
        r.wer = wer(clip.reference_text, r.hypothesis);
        r.word_accuracy = word_accuracy(r.wer);
        r.ok = true;
    } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
    }
    return r;
}

DatasetSummary summarize(const std::vector<ClipResult>& per_clip) {
    DatasetSummary s;
    s.clips = per_clip.size();
    std::vector<double> w, wers, accs;
    std::vector<double> tw, pre, vad, trx, sug, tot;
    for (const auto& c : per_clip) {
        if (!c.ok) continue;
        ++s.scored;
        s.total_duration_seconds += c.duration_seconds;
        w.push_back(c.duration_seconds);
        wers.push_back(c.wer);
        accs.push_back(c.word_accuracy);
        if (c.text_events > 0) {
            tw.push_back(c.duration_seconds);
            pre.push_back(c.mean_timing.pre_vad);
            vad.push_back(c.mean_timing.vad);
            trx.push_back(c.mean_timing.trx);
            sug.push_back(c.mean_timing.suggestion);
            tot.push_back(c.mean_timing.total);
        }
    }
    const auto total_weight = [](const std::vector<double>& v) {
        double t = 0.0;
        for (double x : v) t += x;
        return t;
    };
    if (!w.empty() && total_weight(w) > 0.0) {
        s.wer = weighted_mean(wers, w);
        s.word_accuracy = weighted_mean(accs, w);
    }
    if (!tw.empty() && total_weight(tw) > 0.0) {
        s.pre_vad = weighted_mean(pre, tw);
        s.vad = weighted_mean(vad, tw);
        s.trx = weighted_mean(trx, tw);
        s.suggestion = weighted_mean(sug, tw);
        s.total = weighted_mean(tot, tw);
    }
    return s;
}

EvalReport run_eval(const std::vector<ClipManifestEntry>& manifest, const EvalConfig& config) {
    EvalReport report;
    report.config = config;
    for (const auto& clip : manifest) report.per_clip.push_back(evaluate_clip(clip, config));
    report.dataset = summarize(report.per_clip);
    return report;
}

namespace {

json stat_json(const WeightedStat& s) { return {{"mean", s.mean}, {"standard_error", s.standard_error}}; }

WeightedStat stat_from(const json& j) { return {j.at("mean").get<double>(), j.at("standard_error").get<double>()}; }

json timings_json(const ClipTimings& t) {
    return {{"pre_vad", t.pre_vad}, {"vad", t.vad}, {"trx", t.trx}, {"suggestion", t.suggestion}, {"total", t.total}};
}

json config_json(const EvalConfig& c) {
    json j{{"chunk_seconds", c.chunk_seconds},
           {"chunk_count", c.chunk_count},
           {"backend", c.backend},
           {"endpoint", c.endpoint}};
    if (c.backend == "external") {
        j["backend_command"] = c.backend_command;
        j["backend_options"] = c.backend_options;
    }
    return j;
}

}  // namespace

json report_to_json(const EvalReport& report) {
    json clips = json::array();
    for (const auto& c : report.per_clip) {
        json j{{"clip_id", c.clip_id}, {"duration_seconds", c.duration_seconds}, {"ok", c.ok}};
        if (c.ok) {
            j["wer"] = c.wer;
            j["word_accuracy"] = c.word_accuracy;
            j["hypothesis"] = c.hypothesis;
            j["events"] = c.events;
            j["text_events"] = c.text_events;
            j["mean_timing"] = timings_json(c.mean_timing);
        }
        if (!c.error.empty()) j["error"] = c.error;
        clips.push_back(std::move(j));
    }
    const auto& d = report.dataset;
    json dataset{{"clips", d.clips},
                 {"scored", d.scored},
                 {"total_duration_seconds", d.total_duration_seconds},
                 {"weighted_wer", stat_json(d.wer)},
                 {"weighted_word_accuracy", stat_json(d.word_accuracy)},
                 {"weighted_timing",
                  {{"pre_vad", stat_json(d.pre_vad)},
                   {"vad", stat_json(d.vad)},
                   {"trx", stat_json(d.trx)},
                   {"suggestion", stat_json(d.suggestion)},
                   {"total", stat_json(d.total)}}}};
    return {{"config", config_json(report.config)}, {"per_clip", clips}, {"dataset", dataset}};
}

EvalReport report_from_json(const json& j) {
    try {
        EvalReport r;
        if (j.contains("config")) {
            const auto& c = j["config"];
            r.config.chunk_seconds = c.value("chunk_seconds", r.config.chunk_seconds);
            r.config.chunk_count = c.value("chunk_count", r.config.chunk_count);
            r.config.backend = c.value("backend", r.config.backend);
            r.config.endpoint = c.value("endpoint", r.config.endpoint);
        }
        for (const auto& c : j.at("per_clip")) {
            ClipResult cr;
            cr.clip_id = c.at("clip_id").get<std::string>();
            cr.duration_seconds = c.value("duration_seconds", 0.0);
            cr.ok = c.value("ok", c.contains("wer"));
            cr.error = c.value("error", std::string());
            if (cr.ok) {
                cr.wer = c.at("wer").get<double>();
                cr.word_accuracy = c.value("word_accuracy", word_accuracy(cr.wer));
                cr.hypothesis = c.value("hypothesis", std::string());
                cr.events = c.value("events", std::size_t{0});
                cr.text_events = c.value("text_events", std::size_t{0});
                if (c.contains("mean_timing")) {
                    const auto& t = c["mean_timing"];
                    cr.mean_timing = {t.value("pre_vad", 0.0), t.value("vad", 0.0), t.value("trx", 0.0),
                                      t.value("suggestion", 0.0), t.value("total", 0.0)};
                }
            }
            r.per_clip.push_back(std::move(cr));
        }
        if (j.contains("dataset")) {
            const auto& d = j["dataset"];
            r.dataset.clips = d.value("clips", r.per_clip.size());
            r.dataset.scored = d.value("scored", std::size_t{0});
            r.dataset.total_duration_seconds = d.value("total_duration_seconds", 0.0);
            r.dataset.wer = stat_from(d.at("weighted_wer"));
            r.dataset.word_accuracy = stat_from(d.at("weighted_word_accuracy"));
            const auto& t = d.at("weighted_timing");
            r.dataset.pre_vad = stat_from(t.at("pre_vad"));
            r.dataset.vad = stat_from(t.at("vad"));
            r.dataset.trx = stat_from(t.at("trx"));
            r.dataset.suggestion = stat_from(t.at("suggestion"));
            r.dataset.total = stat_from(t.at("total"));
        } else {
            r.dataset = summarize(r.per_clip);
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("malformed report: ") + e.what());
    }
}

std::vector<SweepCell> sweep(const std::vector<ClipManifestEntry>& manifest, const EvalConfig& base,
                             const std::vector<double>& chunk_seconds, const std::vector<int>& chunk_counts) {
    std::vector<SweepCell> cells;
    for (double cs : chunk_seconds) {
        for (int cn : chunk_counts) {
            SweepCell cell{cs, cn, std::nullopt, {}};
            try {
                auto config = base;
                config.chunk_seconds = cs;
                config.chunk_count = cn;
                cell.report = run_eval(manifest, config);
                if (cell.report->dataset.scored == 0) cell.error = "no clip scored";
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

json sweep_to_json(const std::vector<SweepCell>& cells) {
    json out = json::array();
    for (const auto& c : cells) {
        json j{{"chunk_seconds", c.chunk_seconds}, {"chunk_count", c.chunk_count}};
        if (c.report) j["report"] = report_to_json(*c.report);
        if (!c.error.empty()) j["error"] = c.error;
        out.push_back(std::move(j));
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
    std::ostringstream out;
    out.precision(9);
    out << "chunk_seconds,chunk_count,weighted_wer,weighted_latency,scored_clips,error\n";
    for (const auto& c : cells) {
        out << c.chunk_seconds << ',' << c.chunk_count << ',';
        if (c.report && c.report->dataset.scored > 0) {
            out << c.report->dataset.wer.mean << ',' << c.report->dataset.total.mean << ',' << c.report->dataset.scored;
        } else {
            out << ",,0";
        }
        std::string err = c.error;
        std::replace(err.begin(), err.end(), '"', '\'');
        out << ",\"" << err << "\"\n";
    }
    return out.str();
}

Comparison compare(const EvalReport& a, const EvalReport& b) {
    std::map<std::string, const ClipResult*> left, right;
    for (const auto& c : a.per_clip) left[c.clip_id] = &c;
    for (const auto& c : b.per_clip) right[c.clip_id] = &c;
    std::vector<std::string> missing;
    for (const auto& [id, _] : left) {
        if (!right.count(id)) missing.push_back(id + " (missing from b)");
    }
    for (const auto& [id, _] : right) {
        if (!left.count(id)) missing.push_back(id + " (missing from a)");
    }
    if (!missing.empty()) {
        std::string msg = "clip sets differ:";
        for (const auto& m : missing) msg += " " + m;
        throw Error(ErrorCode::invalid_argument, msg);
    }

    Comparison c;
    std::vector<std::vector<double>> scores;
    std::vector<double> diffs;
    for (const auto& c0 : a.per_clip) {
        const auto* l = left[c0.clip_id];
        const auto* r = right[c0.clip_id];
        if (!l->ok || !r->ok) continue;
        c.pairs.push_back({c0.clip_id, l->word_accuracy, r->word_accuracy});
        scores.push_back({l->word_accuracy, r->word_accuracy});
        diffs.push_back(l->word_accuracy - r->word_accuracy);
    }
    if (!scores.empty()) {
        const auto ranks = mean_ranks(scores);
        c.mean_rank_a = ranks[0];
        c.mean_rank_b = ranks[1];
    }
    c.wilcoxon = wilcoxon_signed_rank(diffs);
    return c;
}

json comparison_to_json(const Comparison& c) {
    json pairs = json::array();
    for (const auto& p : c.pairs) pairs.push_back({{"clip_id", p.clip_id}, {"a", p.a}, {"b", p.b}});
    const auto& w = c.wilcoxon;
    json wil{{"n", w.n_total},
             {"n_effective", w.n_effective},
             {"w_plus", w.w_plus},
             {"w_minus", w.w_minus},
             {"exact", w.exact},
             {"p_undefined", !w.p_two_sided.has_value()}};
    wil["p_two_sided"] = w.p_two_sided ? json(*w.p_two_sided) : json(nullptr);
    wil["p_greater"] = w.p_greater ? json(*w.p_greater) : json(nullptr);
    wil["p_less"] = w.p_less ? json(*w.p_less) : json(nullptr);
    return {{"per_clip_pairs", pairs},
            {"mean_ranks", {{"a", c.mean_rank_a}, {"b", c.mean_rank_b}}},
            {"wilcoxon", wil}};
}

void write_synthetic_clip(const std::filesystem::path& path, double duration_seconds, int sample_rate, unsigned seed) {
    if (!(duration_seconds > 0.0) || sample_rate <= 0) {
        throw Error(ErrorCode::invalid_argument, "clip needs a positive duration and rate");
    }
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> noise(-0.05f, 0.05f);
    const auto n = static_cast<std::size_t>(std::llround(duration_seconds * sample_rate));
    PcmAudio audio{std::vector<float>(n), sample_rate};
    constexpr double two_pi = 6.283185307179586;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        // 220 Hz carrier with a slow 3 Hz envelope that never drops below 0.5.
        const double env = 0.75 + 0.25 * std::sin(two_pi * 3.0 * t);
        audio.samples[i] = static_cast<float>(0.3 * env * std::sin(two_pi * 220.0 * t)) + noise(rng);
    }
    write_wav(path, audio);
}

}  // namespace streamscribe
