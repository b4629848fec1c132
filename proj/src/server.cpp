#include "ganlab/server.hpp"

#include "ganlab/error.hpp"
#include "ganlab/protocol.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <charconv>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace ganlab {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

ListenAddress parse_listen_address(std::string_view text)
{
    ListenAddress a;
    std::string_view host = text;
    std::optional<std::string_view> port;
    if (text.starts_with('[')) {
        const auto close = text.find(']');
        if (close == std::string_view::npos ||
            (close + 1 < text.size() && text[close + 1] != ':')) {
            throw ConfigError("bad listen address: " + std::string(text));
        }
        host = text.substr(1, close - 1);
        if (close + 1 < text.size()) {
            port = text.substr(close + 2);
        }
    } else if (const auto colon = text.rfind(':'); colon != std::string_view::npos) {
        host = text.substr(0, colon);
        port = text.substr(colon + 1);
    }
    if (port) {
        unsigned value = 0;
        const auto [end, ec] = std::from_chars(port->data(), port->data() + port->size(), value);
        if (port->empty() || ec != std::errc{} || end != port->data() + port->size() ||
            value > 65535) {
            throw ConfigError("bad port in listen address: " + std::string(text));
        }
        a.port = static_cast<unsigned short>(value);
    }
    if (!host.empty()) {
        a.host = std::string(host);
    }
    boost::system::error_code ec;
    net::ip::make_address(a.host, ec);
    if (ec) {
        throw ConfigError("bad host in listen address: " + std::string(text));
    }
    return a;
}

namespace {

std::string_view mime_type(const std::filesystem::path& path)
{
    const auto ext = path.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".ico") return "image/x-icon";
    if (ext == ".map") return "application/json";
    if (ext == ".txt") return "text/plain";
    return "application/octet-stream";
}

// Maps a request target onto a file under root; empty when it escapes.
std::optional<std::filesystem::path> resolve(const std::filesystem::path& root,
                                             std::string_view target)
{
    target = target.substr(0, target.find_first_of("?#"));
    if (target.empty() || target.front() != '/') {
        return std::nullopt;
    }
    std::filesystem::path rel(std::string(target.substr(1)));
    for (const auto& part : rel) {
        if (part == "..") {
            return std::nullopt;
        }
    }
    if (target.back() == '/') {
        rel /= "index.html";
    }
    return root / rel;
}

// One websocket client with its own Session. Runs on the connection's
// io_context thread, which is the only thread touching the Session.
class SessionConnection : public std::enable_shared_from_this<SessionConnection> {
public:
    SessionConnection(tcp::socket socket, const ServerOptions& options)
        : ws_(std::move(socket)),
          session_(options.session),
          timer_(ws_.get_executor()),
          max_pending_(std::max<std::size_t>(1, options.max_pending_frames))
    {
    }

    void run(http::request<http::string_body> request)
    {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(request, [self = shared_from_this()](beast::error_code ec) {
            if (ec) {
                return;
            }
            self->send(self->session_.current_snapshot());
            self->read();
            self->schedule();
        });
    }

private:
    void read()
    {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->on_read(ec);
        });
    }

    void on_read(beast::error_code ec)
    {
        if (ec) {
            close();
            return;
        }
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        try {
            for (auto& frame : session_.handle(protocol::decode_command(text))) {
                send(std::move(frame));
            }
        } catch (const DecodeError& e) {
            send(ErrorFrame{"decode", e.what()});
        } catch (const ConfigError& e) {
            send(ErrorFrame{"config", e.what()});
        } catch (const std::exception& e) {
            send(ErrorFrame{"internal", e.what()});
        }
        read();
        schedule();
    }

    void schedule()
    {
        ++generation_;
        timer_.cancel();
        stalled_ = false;
        const auto delay = session_.tick_delay();
        if (closed_ || !delay) {
            return;
        }
        if (outbox_.size() >= max_pending_) {
            stalled_ = true;
            return;
        }
        timer_.expires_after(*delay);
        timer_.async_wait([self = shared_from_this(), gen = generation_](beast::error_code ec) {
            if (ec || gen != self->generation_ || self->closed_) {
                return;
            }
            try {
                for (auto& frame : self->session_.tick()) {
                    self->send(std::move(frame));
                }
            } catch (const std::exception& e) {
                self->send(ErrorFrame{"internal", e.what()});
            }
            self->schedule();
        });
    }

    void send(Frame frame)
    {
        if (closed_) {
            return;
        }
        outbox_.push_back(protocol::encode_frame(frame));
        if (!writing_) {
            write();
        }
    }

    void write()
    {
        writing_ = true;
        ws_.text(true);
        ws_.async_write(net::buffer(outbox_.front()),
                        [self = shared_from_this()](beast::error_code ec, std::size_t) {
                            if (ec) {
                                self->close();
                                return;
                            }
                            self->outbox_.pop_front();
                            if (!self->outbox_.empty()) {
                                self->write();
                            } else {
                                self->writing_ = false;
                            }
                            if (self->stalled_ && self->outbox_.size() < self->max_pending_) {
                                self->schedule();
                            }
                        });
    }

    void close()
    {
        closed_ = true;
        ++generation_;
        timer_.cancel();
        beast::error_code ignored;
        beast::get_lowest_layer(ws_).socket().close(ignored);
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    Session session_;
    net::steady_timer timer_;
    std::deque<std::string> outbox_;
    std::size_t max_pending_;
    std::uint64_t generation_ = 0;
    bool writing_ = false;
    bool stalled_ = false;
    bool closed_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
public:
    HttpConnection(tcp::socket socket, const ServerOptions& options)
        : stream_(std::move(socket)), options_(options)
    {
    }

    void run() { read(); }

private:
    void read()
    {
        request_ = {};
        stream_.expires_after(std::chrono::seconds(60));
        http::async_read(stream_, buffer_, request_,
                         [self = shared_from_this()](beast::error_code ec, std::size_t) {
                             self->on_read(ec);
                         });
    }

    void on_read(beast::error_code ec)
    {
        if (ec) {
            beast::error_code ignored;
            stream_.socket().shutdown(tcp::socket::shutdown_both, ignored);
            return;
        }
        if (websocket::is_upgrade(request_)) {
            const auto target = std::string_view(request_.target().data(), request_.target().size());
            if (target.substr(0, target.find('?')) == "/session") {
                stream_.expires_never();
                std::make_shared<SessionConnection>(stream_.release_socket(), options_)
                    ->run(std::move(request_));
                return;
            }
            respond(http::status::not_found, "text/plain", "no such socket endpoint\n");
            return;
        }
        if (request_.method() != http::verb::get && request_.method() != http::verb::head) {
            respond(http::status::method_not_allowed, "text/plain", "GET only\n");
            return;
        }
        serve_file();
    }

    void serve_file()
    {
        const auto target = std::string_view(request_.target().data(), request_.target().size());
        const auto path = options_.static_dir.empty()
                              ? std::nullopt
                              : resolve(options_.static_dir, target);
        std::error_code fs_ec;
        if (path && std::filesystem::is_regular_file(*path, fs_ec)) {
            std::ifstream in(*path, std::ios::binary);
            std::ostringstream body;
            body << in.rdbuf();
            respond(http::status::ok, mime_type(*path), body.str());
            return;
        }
        const auto bare = target.substr(0, target.find_first_of("?#"));
        if (bare == "/" || bare == "/index.html") {
            respond(http::status::ok, "text/html; charset=utf-8", std::string(fallback_page()));
            return;
        }
        respond(http::status::not_found, "text/plain", "not found\n");
    }

    void respond(http::status status, std::string_view type, std::string body)
    {
        auto res = std::make_shared<http::response<http::string_body>>(status, request_.version());
        res->set(http::field::server, "ganlab");
        res->set(http::field::content_type, beast::string_view(type.data(), type.size()));
        res->keep_alive(request_.keep_alive());
        if (request_.method() == http::verb::head) {
            res->content_length(body.size());
        } else {
            res->body() = std::move(body);
            res->prepare_payload();
        }
        http::async_write(stream_, *res,
                          [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                              if (ec || !res->keep_alive()) {
                                  beast::error_code ignored;
                                  self->stream_.socket().shutdown(tcp::socket::shutdown_send,
                                                                  ignored);
                                  return;
                              }
                              self->read();
                          });
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> request_;
    const ServerOptions& options_;
};

struct Worker {
    net::io_context ioc{1};
    std::thread thread;
    std::atomic<bool> done{false};
};

} // namespace

struct Server::Impl {
    ServerOptions options;
    net::io_context accept_ioc{1};
    tcp::acceptor acceptor{accept_ioc};
    std::thread accept_thread;
    std::mutex mutex;
    std::condition_variable stopped_cv;
    bool started = false;
    bool stopped = false;
    std::vector<std::unique_ptr<Worker>> workers;

    void accept()
    {
        auto worker = std::make_unique<Worker>();
        auto* w = worker.get();
        {
            std::lock_guard lock(mutex);
            reap();
            workers.push_back(std::move(worker));
        }
        acceptor.async_accept(w->ioc, [this, w](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec != net::error::operation_aborted) {
                    accept();
                }
                return;
            }
            std::make_shared<HttpConnection>(std::move(socket), options)->run();
            w->thread = std::thread([w] {
                w->ioc.run();
                w->done = true;
            });
            accept();
        });
    }

    // Joins workers whose connections have ended. Caller holds the mutex.
    void reap()
    {
        std::erase_if(workers, [](const std::unique_ptr<Worker>& w) {
            if (!w->done) {
                return false;
            }
            w->thread.join();
            return true;
        });
    }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>())
{
    impl_->options = std::move(options);
}

Server::~Server() { stop(); }

void Server::start()
{
    auto& d = *impl_;
    if (d.started) {
        throw ContractError("server already started");
    }
    const tcp::endpoint endpoint(net::ip::make_address(d.options.listen.host),
                                 d.options.listen.port);
    d.acceptor.open(endpoint.protocol());
    d.acceptor.set_option(net::socket_base::reuse_address(true));
    d.acceptor.bind(endpoint);
    d.acceptor.listen();
    d.started = true;
    d.accept();
    d.accept_thread = std::thread([&d] { d.accept_ioc.run(); });
}

void Server::stop()
{
    auto& d = *impl_;
    {
        std::lock_guard lock(d.mutex);
        if (!d.started || d.stopped) {
            d.stopped = true;
            d.stopped_cv.notify_all();
            return;
        }
        d.stopped = true;
    }
    net::post(d.accept_ioc, [&d] {
        beast::error_code ignored;
        d.acceptor.close(ignored);
    });
    d.accept_thread.join();
    std::lock_guard lock(d.mutex);
    for (auto& w : d.workers) {
        w->ioc.stop();
        if (w->thread.joinable()) {
            w->thread.join();
        }
    }
    d.workers.clear();
    d.stopped_cv.notify_all();
}

void Server::wait()
{
    std::unique_lock lock(impl_->mutex);
    impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

std::string_view fallback_page()
{
    return R"html(<!doctype html>
<html>
<head>
<meta charset="utf-8">
<title>GAN Lab</title>
<style>
body { font: 14px sans-serif; margin: 1.5em; }
canvas { border: 1px solid #999; }
button { margin-right: 0.3em; }
#stats { font-family: monospace; white-space: pre; margin-top: 0.8em; }
</style>
</head>
<body>
<h3>GAN Lab session</h3>
<p>No UI bundle is installed; this page is a minimal client for the <code>/session</code> socket.</p>
<div>
<button data-cmd="Play">Play</button><button data-cmd="Pause">Pause</button>
<button data-cmd="StepBoth">Step</button><button data-cmd="StepDiscriminator">Step D</button>
<button data-cmd="StepGenerator">Step G</button><button data-cmd="SlowMotionOn">Slow</button>
<button data-cmd="SlowMotionOff">Slow off</button><button data-cmd="Reset">Reset</button>
</div>
<p><canvas id="view" width="400" height="400"></canvas></p>
<div id="stats">connecting...</div>
<script>
const view = document.getElementById("view").getContext("2d");
const stats = document.getElementById("stats");
const ws = new WebSocket((location.protocol === "https:" ? "wss://" : "ws://") + location.host + "/session");
const send = (name, args) => ws.send(JSON.stringify({kind: "command", name, args: args || {}}));
document.querySelectorAll("button[data-cmd]").forEach(b => b.onclick = () => send(b.dataset.cmd));
function draw(s) {
  const W = 400, hm = s.heatmap, n = hm.resolution, c = W / n;
  for (let r = 0; r < n; ++r) for (let k = 0; k < n; ++k) {
    const v = hm.scores[r * n + k];
    view.fillStyle = `rgb(${Math.round(255 - 80 * (1 - v))},${Math.round(255 - 80 * v)},255)`;
    view.fillRect(k * c, W - (r + 1) * c, c + 1, c + 1);
  }
  const dot = (p, col) => { view.fillStyle = col; view.beginPath(); view.arc(p[0] * W, W - p[1] * W, 2.5, 0, 7); view.fill(); };
  s.real_samples.forEach(p => dot(p, "#2a9d3a"));
  s.fake_samples.forEach(p => dot(p, "#8a2be2"));
  const m = s.metrics;
  stats.textContent = `epoch ${s.epoch}  mode ${s.mode}` + (s.slow_phase ? `  phase ${JSON.stringify(s.slow_phase)}` : "") +
    `\nd_loss ${(+m.d_loss).toFixed(4)}  g_loss ${(+m.g_loss).toFixed(4)}  kl ${m.kl}  js ${(+m.js).toFixed(4)}`;
}
ws.onmessage = e => {
  const f = JSON.parse(e.data);
  if (f.kind === "snapshot") draw(f.payload);
  else if (f.kind === "error") stats.textContent += `\nerror (${f.payload.code}): ${f.payload.message}`;
};
ws.onclose = () => stats.textContent += "\ndisconnected";
</script>
</body>
</html>
)html";
}

} // namespace ganlab
