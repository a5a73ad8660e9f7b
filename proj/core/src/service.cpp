#include "facedit/service.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "facedit/errors.hpp"
#include "facedit/log.hpp"
#include "facedit/raster.hpp"
#include "facedit/session.hpp"
#include "facedit/sketch.hpp"

namespace facedit {

namespace fs = std::filesystem;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using json = nlohmann::json;

Gallery::Gallery(const fs::path& dir, int resolution) : dir_(dir), resolution_(resolution) {
  if (dir.empty() || !fs::is_directory(dir)) return;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") ids_.push_back(e.path().stem());
  }
  std::sort(ids_.begin(), ids_.end());
}

bool Gallery::contains(const std::string& id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

torch::Tensor Gallery::image(const std::string& id) const {
  if (!contains(id)) throw InvalidInput("unknown appearance '" + id + "'");
  const auto raw = read_png(dir_ / (id + ".png"), 3);
  if (raw.size(1) == resolution_ && raw.size(2) == resolution_) return raw;
  return mat_to_tensor(square_resize(tensor_to_mat(raw), resolution_));
}

std::string Gallery::png(const std::string& id) const {
  if (!contains(id)) throw InvalidInput("unknown appearance '" + id + "'");
  std::ifstream in(dir_ / (id + ".png"), std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

class Unavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_string(const std::vector<std::uint8_t>& bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

torch::Tensor fit(torch::Tensor raster, int resolution) {
  if (raster.size(1) == resolution && raster.size(2) == resolution) return raster;
  return mat_to_tensor(square_resize(tensor_to_mat(raster), resolution));
}

/// PNG from a multipart field, or from the raw body when `body_ok`.
std::optional<std::string> upload(const httplib::Request& req, const std::string& field,
                                  bool body_ok) {
  if (req.is_multipart_form_data()) {
    if (req.has_file(field)) return req.get_file_value(field).content;
    return std::nullopt;
  }
  if (body_ok && !req.body.empty()) return req.body;
  return std::nullopt;
}

std::string param(const httplib::Request& req, const std::string& name) {
  if (req.is_multipart_form_data() && req.has_file(name)) return req.get_file_value(name).content;
  if (req.has_param(name)) return req.get_param_value(name);
  return {};
}

json tensor_json(const torch::Tensor& t) {
  const auto c = t.detach().to(torch::kFloat64).contiguous();
  const auto* p = c.data_ptr<double>();
  return {{"shape", c.sizes().vec()}, {"data", std::vector<double>(p, p + c.numel())}};
}

std::string session_id() {
  static std::atomic<std::uint64_t> counter{0};
  std::random_device rd;
  std::ostringstream os;
  os << std::hex << rd() << '-' << ++counter;
  return os.str();
}

}  // namespace

struct Service::Impl {
  std::shared_ptr<const Engine> engine;
  ServiceOptions opts;
  Gallery gallery;
  int resolution;
  httplib::Server http;
  std::thread http_thread;
  int bound_port = -1;

  net::io_context ioc;
  std::unique_ptr<tcp::acceptor> acceptor;
  std::thread stream_thread;
  int bound_stream_port = -1;
  std::atomic<bool> stopping{false};
  std::mutex conn_mu;
  std::vector<std::thread> connections;
  std::vector<std::weak_ptr<websocket::stream<tcp::socket>>> sockets;

  std::mutex wait_mu;
  std::condition_variable wait_cv;
  bool stopped = false;

  Impl(std::shared_ptr<const Engine> e, ServiceOptions o)
      : engine(std::move(e)),
        opts(std::move(o)),
        gallery(opts.gallery, engine ? engine->resolution() : opts.resolution),
        resolution(engine ? engine->resolution() : opts.resolution) {}

  const Engine& model() const {
    if (!engine) throw Unavailable("model checkpoints are not loaded");
    return *engine;
  }

  torch::Tensor required_image(const httplib::Request& req, const std::string& field, bool body_ok) {
    const auto bytes = upload(req, field, body_ok);
    if (!bytes) throw InvalidInput("missing image field '" + field + "'");
    return fit(decode_png(*bytes, 3), resolution);
  }

  torch::Tensor appearance_of(const httplib::Request& req) {
    if (const auto bytes = upload(req, "appearance", false)) return fit(decode_png(*bytes, 3), resolution);
    const auto id = param(req, "appearance_id");
    if (!id.empty()) return gallery.image(id);
    throw InvalidInput("give an 'appearance' image or an 'appearance_id'");
  }

  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Unavailable& e) {
        res.status = 503;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      }
    };
  }

  void routes() {
    http.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(json{{"model", engine != nullptr}, {"resolution", resolution}}.dump(),
                      "application/json");
    });
    http.Get("/appearances", guarded([this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      for (const auto& id : gallery.ids()) list.push_back({{"id", id}, {"url", "/appearances/" + id}});
      res.set_content(list.dump(), "application/json");
    }));
    http.Get(R"(/appearances/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!gallery.contains(id)) {
        res.status = 404;
        res.set_content(json{{"error", "unknown appearance '" + id + "'"}}.dump(), "application/json");
        return;
      }
      res.set_content(gallery.png(id), "image/png");
    });
    http.Post("/extract-sketch", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto bytes = upload(req, "image", true);
      if (!bytes) throw InvalidInput("missing image");
      const auto image = decode_png(*bytes, 3);
      res.set_content(to_string(encode_png(extract_sketch(image, SketchParams{}))), "image/png");
    }));
    http.Post("/generate", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto& e = model();
      torch::Tensor geometry;
      if (const auto s = upload(req, "sketch", false)) {
        geometry = (decode_png(*s, 1) >= 0.5).to(torch::kFloat32);
        if (geometry.size(1) != resolution || geometry.size(2) != resolution) {
          throw InvalidInput("sketch must be " + std::to_string(resolution) + "px square");
        }
      } else {
        geometry = required_image(req, "geometry_image", false);
      }
      res.set_content(to_string(encode_png(e.generate(geometry, appearance_of(req)))), "image/png");
    }));
    http.Post("/disentangle", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto& e = model();
      const auto codes = e.disentangle(required_image(req, "image", true));
      json out;
      out["resolution"] = resolution;
      for (Component c : kAllComponents) {
        const auto& w = e.layout().window(c);
        auto& j = out["components"][std::string(component_name(c))];
        j["window"] = {w.x, w.y, w.w, w.h};
        j["geometry"] = tensor_json(codes.geometry.at(c).data[0]);
        j["appearance"] = tensor_json(codes.appearance.at(c).data[0]);
      }
      res.set_content(out.dump(), "application/json");
    }));
    http.Post("/morph", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto& e = model();
      auto weight = [&](const char* name) {
        const auto v = param(req, name);
        return v.empty() ? 0.5 : std::stod(v);
      };
      const auto out = e.morph(required_image(req, "a", false), required_image(req, "b", false),
                               weight("t_geom"), weight("t_app"));
      res.set_content(to_string(encode_png(out)), "image/png");
    }));
  }

  // ---- websocket session ----------------------------------------------------

  void serve_session(tcp::socket socket) {
    auto ws = std::make_shared<websocket::stream<tcp::socket>>(std::move(socket));
    beast::flat_buffer buffer;
    http::request<http::string_body> req;
    beast::error_code ec;
    http::read(ws->next_layer(), buffer, req, ec);
    if (ec) return;
    if (!websocket::is_upgrade(req) || req.target() != "/session") {
      http::response<http::string_body> res{http::status::not_found, req.version()};
      res.set(http::field::content_type, "application/json");
      res.body() = json{{"error", "websocket endpoint is /session"}}.dump();
      res.prepare_payload();
      http::write(ws->next_layer(), res, ec);
      return;
    }
    ws->accept(req, ec);
    if (ec) return;
    {
      std::lock_guard lock(conn_mu);
      sockets.push_back(ws);
    }

    EditSession session(session_id(), resolution);
    std::mutex write_mu;
    auto send = [&](const std::string& payload, bool text) {
      std::lock_guard lock(write_mu);
      beast::error_code wec;
      ws->text(text);
      ws->write(net::buffer(payload), wec);
    };
    auto send_frame = [&](const EditSession::Frame& f) {
      std::lock_guard lock(write_mu);
      beast::error_code wec;
      ws->text(true);
      ws->write(net::buffer(json{{"type", "frame"}, {"rev", f.rev}}.dump()), wec);
      ws->binary(true);
      ws->write(net::buffer(f.png.data(), f.png.size()), wec);
    };

    std::mutex render_mu;
    std::condition_variable render_cv;
    bool pending = false;
    bool closed = false;
    std::thread renderer([&] {
      for (;;) {
        {
          std::unique_lock lock(render_mu);
          render_cv.wait(lock, [&] { return pending || closed; });
          if (closed) return;
          pending = false;
        }
        try {
          const auto snap = session.snapshot();
          EditSession::Frame frame{snap.rev, encode_png(render_snapshot(*engine, snap))};
          session.store_frame(frame);
          std::lock_guard lock(render_mu);
          if (pending || closed) continue;  // superseded: only the latest revision is delivered
        } catch (const std::exception& e) {
          send(json{{"type", "error"}, {"message", e.what()}, {"rev", session.revision()}}.dump(), true);
          continue;
        }
        if (auto f = session.last_frame()) send_frame(*f);
      }
    });
    auto schedule = [&] {
      if (!engine) return;
      std::lock_guard lock(render_mu);
      pending = true;
      render_cv.notify_one();
    };

    send(json{{"type", "hello"},
              {"session", session.id()},
              {"canvas", resolution},
              {"line_cap", "round"},
              {"line_join", "round"},
              {"rasterizer", "8-connected"},
              {"rev", session.revision()},
              {"model", engine != nullptr}}
             .dump(),
         true);
    schedule();

    for (;;) {
      beast::flat_buffer msg;
      ws->read(msg, ec);
      if (ec) break;
      if (!ws->got_text()) {
        send(json{{"type", "error"}, {"message", "binary messages are not accepted"},
                  {"rev", session.revision()}}.dump(), true);
        continue;
      }
      const auto text = beast::buffers_to_string(msg.data());
      try {
        json j = json::parse(text, nullptr, false);
        if (j.is_discarded()) throw InvalidInput("message is not JSON");
        const std::string type = j.is_object() ? j.value("type", "stroke") : "stroke";
        if (type == "stroke" || type == "strokes") {
          const auto strokes =
              parse_strokes(j.is_object() && j.contains("events") ? j["events"].dump() : text);
          if (!session.apply(strokes)) {
            if (auto f = session.last_frame()) send_frame(*f);
            continue;
          }
        } else if (type == "select_appearance") {
          const auto id = j.at("id").get<std::string>();
          session.select_appearance(j.at("rev").get<std::int64_t>(), id, gallery.image(id));
        } else if (type == "edit_component") {
          const auto name = j.at("component").get<std::string>();
          const auto c = parse_component(name);
          if (!c) throw InvalidInput("unknown component '" + name + "'");
          const auto id = j.at("appearance_id").get<std::string>();
          session.set_component_reference(j.at("rev").get<std::int64_t>(), *c, gallery.image(id));
        } else {
          throw InvalidInput("unknown message type '" + type + "'");
        }
        send(json{{"type", "ack"}, {"rev", session.revision()}}.dump(), true);
        schedule();
      } catch (const std::exception& e) {
        send(json{{"type", "error"}, {"message", e.what()}, {"rev", session.revision()}}.dump(), true);
      }
    }
    {
      std::lock_guard lock(render_mu);
      closed = true;
    }
    render_cv.notify_one();
    renderer.join();
  }

  void accept_loop() {
    for (;;) {
      tcp::socket socket(ioc);
      beast::error_code ec;
      acceptor->accept(socket, ec);
      if (stopping) break;
      if (ec) continue;
      std::lock_guard lock(conn_mu);
      connections.emplace_back([this, s = std::move(socket)]() mutable {
        try {
          serve_session(std::move(s));
        } catch (const std::exception& e) {
          log::warn(std::string("session ended: ") + e.what());
        }
      });
    }
  }
};

Service::Service(std::shared_ptr<const Engine> engine, ServiceOptions opts)
    : impl_(std::make_unique<Impl>(std::move(engine), std::move(opts))) {}

Service::~Service() { stop(); }

void Service::start() {
  auto& s = *impl_;
  s.routes();
  if (s.opts.port == 0) {
    s.bound_port = s.http.bind_to_any_port(s.opts.host);
  } else if (s.http.bind_to_port(s.opts.host, s.opts.port)) {
    s.bound_port = s.opts.port;
  }
  if (s.bound_port <= 0) {
    throw ConfigError("cannot bind HTTP port " + std::to_string(s.opts.port));
  }
  const int stream = s.opts.stream_port < 0 ? s.bound_port + 1 : s.opts.stream_port;
  try {
    s.acceptor = std::make_unique<tcp::acceptor>(
        s.ioc, tcp::endpoint(net::ip::make_address(s.opts.host), static_cast<unsigned short>(stream)));
  } catch (const std::exception& e) {
    s.http.stop();
    throw ConfigError("cannot bind stream port " + std::to_string(stream) + ": " + e.what());
  }
  s.bound_stream_port = s.acceptor->local_endpoint().port();
  s.http_thread = std::thread([&s] { s.http.listen_after_bind(); });
  s.stream_thread = std::thread([&s] { s.accept_loop(); });
  s.http.wait_until_ready();
  log::info(log::cat("serving http://", s.opts.host, ":", s.bound_port, " and ws://", s.opts.host,
                     ":", s.bound_stream_port, "/session"));
}

void Service::wait() {
  std::unique_lock lock(impl_->wait_mu);
  impl_->wait_cv.wait(lock, [this] { return impl_->stopped; });
}

void Service::stop() {
  auto& s = *impl_;
  if (s.stopping.exchange(true)) return;
  s.http.stop();
  if (s.http_thread.joinable()) s.http_thread.join();
  if (s.acceptor) {
    // Wake the blocking accept with a throwaway connection.
    beast::error_code ec;
    tcp::socket poke(s.ioc);
    poke.connect(s.acceptor->local_endpoint(), ec);
    if (s.stream_thread.joinable()) s.stream_thread.join();
    s.acceptor->close(ec);
  }
  {
    std::lock_guard lock(s.conn_mu);
    for (auto& weak : s.sockets) {
      if (auto ws = weak.lock()) {
        beast::error_code ec;
        ws->next_layer().shutdown(tcp::socket::shutdown_both, ec);
      }
    }
  }
  for (auto& t : s.connections) {
    if (t.joinable()) t.join();
  }
  {
    std::lock_guard lock(s.wait_mu);
    s.stopped = true;
  }
  s.wait_cv.notify_all();
}

int Service::port() const { return impl_->bound_port; }
int Service::stream_port() const { return impl_->bound_stream_port; }

}  // namespace facedit
