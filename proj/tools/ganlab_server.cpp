#include "ganlab/error.hpp"
#include "ganlab/server.hpp"

#include <CLI11.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv)
{
    using namespace ganlab;
    CLI::App app{"Interactive GAN session server (websocket at /session, UI at /)",
                 "ganlab-server"};

    const char* env_addr = std::getenv("GANLAB_ADDR");
    std::string addr = env_addr ? env_addr : "127.0.0.1:8080";
    std::string static_dir;
    std::string preset = "two_gaussians";
    ServerOptions options;
    app.add_option("--addr", addr, "Listen address host:port (env GANLAB_ADDR)");
    app.add_option("--static-dir", static_dir, "Directory with the UI bundle")
        ->check(CLI::ExistingDirectory);
    app.add_option("--preset", preset, "Initial real-data preset")
        ->check(CLI::IsMember({"line", "two_gaussians", "ring", "three_clusters", "grid_blobs"}));
    app.add_option("--seed", options.session.seed, "Seed for new sessions");
    app.add_option("--frame-interval", options.session.frame_interval,
                   "Epochs between snapshots while running")
        ->check(CLI::PositiveNumber);
    app.add_option("--slow-tick-ms", options.session.slow_tick_ms,
                   "Delay between slow-motion phases")
        ->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    try {
        options.listen = parse_listen_address(addr);
        options.session.distribution = make_preset(parse_distribution_kind(preset));
    } catch (const ConfigError& e) {
        std::cerr << "ganlab-server: " << e.what() << "\n";
        return 2;
    }
    options.static_dir = static_dir;

    Server server(options);
    try {
        server.start();
    } catch (const std::exception& e) {
        std::cerr << "ganlab-server: cannot listen on " << addr << ": " << e.what() << "\n";
        return 1;
    }
    std::cout << "listening on http://" << options.listen.host << ":" << server.port() << "/"
              << std::endl;

    boost::asio::io_context signals_ioc;
    boost::asio::signal_set signals(signals_ioc, SIGINT, SIGTERM);
    signals.async_wait([&](const boost::system::error_code&, int) { server.stop(); });
    signals_ioc.run();
    return 0;
}
