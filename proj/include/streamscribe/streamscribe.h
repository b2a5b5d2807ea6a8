#ifndef STREAMSCRIBE_H
#define STREAMSCRIBE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SS_API __declspec(dllexport)
#else
#define SS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ss_status {
    SS_OK = 0,
    SS_ERR_INVALID_ARGUMENT,
    SS_ERR_CONFIG,
    SS_ERR_SIZE,
    SS_ERR_SEQUENCE,
    SS_ERR_IO,
    SS_ERR_ADDRESS_IN_USE,
    SS_ERR_BACKEND,
    SS_ERR_BACKEND_TIMEOUT,
    SS_ERR_BACKEND_PROTOCOL,
    SS_ERR_BACKEND_CRASHED,
    SS_ERR_INVALID_STATE,
    SS_ERR_NOT_FOUND,
    SS_ERR_INTERNAL
} ss_status;

SS_API const char* ss_status_string(ss_status status);
/* Message of the last failed call on this thread; empty after success. */
SS_API const char* ss_last_error(void);
/* Frees strings returned through char** out-parameters. */
SS_API void ss_string_free(char* s);

/* Shifting register of chunk_count chunks of chunk_seconds each. */
typedef struct ss_register ss_register;

SS_API ss_status ss_register_capacity(int chunk_count, double chunk_seconds, int sample_rate, uint64_t* out);
SS_API ss_status ss_register_create(int chunk_count, double chunk_seconds, int sample_rate, ss_register** out);
SS_API void ss_register_destroy(ss_register* reg);
/* n must equal one chunk of samples. */
SS_API ss_status ss_register_push(ss_register* reg, const float* samples, size_t n);
SS_API ss_status ss_register_flush(ss_register* reg);
SS_API ss_status ss_register_size(const ss_register* reg, size_t* chunks, size_t* samples);
SS_API ss_status ss_register_appended_total(const ss_register* reg, uint64_t* out);
/* Copies the concatenated content; *written receives the sample count. */
SS_API ss_status ss_register_snapshot(const ss_register* reg, float* out, size_t capacity, size_t* written);

SS_API ss_status ss_has_voice(const float* samples, size_t n, int sample_rate, int frame_ms, double energy_threshold,
                              int min_voiced_frames, int* out);

SS_API ss_status ss_levenshtein(const char* a, const char* b, size_t* out);
SS_API ss_status ss_normalize(const char* text, char** out);
SS_API ss_status ss_suggestion(const char* new_trx, const char* prev_trx, char** out);
SS_API ss_status ss_wer(const char* reference, const char* hypothesis, double* out);

/* HTTP transcription service. */
typedef struct ss_server ss_server;

/* port 0 picks an ephemeral port; a negative port reads STREAMSCRIBE_PORT. */
SS_API ss_status ss_server_create(const char* host, int port, ss_server** out);
/* Serves on a background thread; *bound_port may be NULL. */
SS_API ss_status ss_server_start(ss_server* server, int* bound_port);
/* Serves on the calling thread until ss_server_stop from another thread. */
SS_API ss_status ss_server_serve(ss_server* server);
SS_API void ss_server_stop(ss_server* server);
SS_API void ss_server_destroy(ss_server* server);

/* Evaluation. config_json keys: chunk_seconds, chunk_count, backend,
 * endpoint, backend_command, backend_options, language, backend_vad,
 * seconds_per_audio_second, vad, sample_rate, clip_timeout_ms. */
SS_API ss_status ss_eval_run(const char* manifest_path, const char* config_json, char** report_json);
/* Adds grid keys chunk_seconds_grid and chunk_count_grid. */
SS_API ss_status ss_eval_sweep(const char* manifest_path, const char* config_json, char** sweep_json,
                               char** sweep_csv);
SS_API ss_status ss_eval_compare(const char* report_a_json, const char* report_b_json, char** comparison_json);
SS_API ss_status ss_eval_synth(const char* wav_path, double duration_seconds, int sample_rate, unsigned seed);

#ifdef __cplusplus
}
#endif

#endif
