#pragma once

// Websocket transport for interactive sessions. Each connection to /session
// gets its own Session, driven on its own thread; everything else is served
// as static files.

#include "ganlab/session.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

namespace ganlab {

struct ListenAddress {
    std::string host = "127.0.0.1";
    unsigned short port = 8080;
};

// "host:port", ":port", "host" or "[v6]:port". Throws ConfigError.
ListenAddress parse_listen_address(std::string_view text);

struct ServerOptions {
    ListenAddress listen{};
    // Files served under "/". A built-in page is served for "/" when the
    // directory has no index.html.
    std::filesystem::path static_dir;
    SessionOptions session{};
    // Frames queued for a slow client before training pauses for it to catch up.
    std::size_t max_pending_frames = 8;
};

class Server {
public:
    explicit Server(ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Binds and starts accepting on a background thread. Port 0 picks a free one.
    void start();
    // Closes the listener and every connection, then joins all threads.
    void stop();
    // Blocks until stop() is called from elsewhere.
    void wait();

    unsigned short port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Page served for "/" when no UI bundle is installed.
std::string_view fallback_page();

} // namespace ganlab
