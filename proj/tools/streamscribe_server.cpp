#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "streamscribe/streamscribe.h"

int main(int argc, char** argv) {
    CLI::App app{"Real-time transcription service"};
    std::string host = "0.0.0.0";
    int port = -1;
    app.add_option("--host", host, "Listen address");
    app.add_option("--port", port, "Listen port (default: STREAMSCRIBE_PORT or 8080)");
    CLI11_PARSE(app, argc, argv);

    // Block before any thread starts so only sigwait sees these.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    ss_server* server = nullptr;
    if (ss_server_create(host.c_str(), port, &server) != SS_OK) {
        std::fprintf(stderr, "error: %s\n", ss_last_error());
        return 2;
    }
    int bound = 0;
    if (const auto st = ss_server_start(server, &bound); st != SS_OK) {
        std::fprintf(stderr, "error: %s: %s\n", ss_status_string(st), ss_last_error());
        ss_server_destroy(server);
        return st == SS_ERR_ADDRESS_IN_USE ? 3 : 2;
    }
    std::printf("listening on %s:%d\n", host.c_str(), bound);
    std::fflush(stdout);

    int sig = 0;
    sigwait(&set, &sig);
    ss_server_stop(server);
    ss_server_destroy(server);
    return 0;
}
