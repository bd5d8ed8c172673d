/*
 * Copyright (c) 2026, The chemflow authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "chemflow/service.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "chemflow/text.hpp"
#include "chemflow/trace.hpp"

namespace chemflow::service {

using json = nlohmann::json;

int http_status(Errc code) {
  switch (code) {
    case Errc::invalid_argument:
    case Errc::parse:
    case Errc::protocol:
    case Errc::action_space:
    case Errc::config: return 400;
    case Errc::not_found: return 404;
    case Errc::conflict: return 409;
    case Errc::unavailable: return 503;
    case Errc::io: return 500;
  }
  return 500;
}

namespace {

constexpr long kMaxWaitMs = 30000;

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& msg) {
  send_json(res, {{"error", msg}, {"code", code}}, status);
}

json body_of(const httplib::Request& req) {
  if (text::trim(req.body).empty()) return json::object();
  json j;
  try {
    j = json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("request body is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::invalid_argument, "request body must be a JSON object");
  return j;
}

std::string required_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) throw Error(Errc::invalid_argument, std::string("missing string field '") + key + "'");
  return j[key].get<std::string>();
}

std::string param(const httplib::Request& req, const char* key, const std::string& fallback = {}) {
  return req.has_param(key) ? req.get_param_value(key) : fallback;
}

long long int_param(const httplib::Request& req, const char* key, long long fallback) {
  if (!req.has_param(key)) return fallback;
  auto v = text::parse_int(req.get_param_value(key));
  if (!v || *v < 0) throw Error(Errc::invalid_argument, std::string("query parameter '") + key + "' must be a non-negative integer");
  return *v;
}

trace::Kind kind_of(const std::string& s) {
  try {
    return trace::parse_kind(s);
  } catch (const Error&) {
    throw Error(Errc::invalid_argument, "unknown event kind: " + s);
  }
}

agent::Breakpoint breakpoint_of(const std::string& agent, const std::string& kind) {
  if (agent.empty()) throw Error(Errc::invalid_argument, "breakpoint needs an agent");
  return {agent, kind.empty() ? trace::Kind::acting : kind_of(kind)};
}

json breakpoints_json(const session::Session& s) {
  json arr = json::array();
  for (const auto& b : s.breakpoints()) arr.push_back({{"agent", b.agent}, {"kind", trace::to_string(b.kind)}});
  return arr;
}

}  // namespace

struct Server::Impl {
  session::SessionManager& sessions;
  httplib::Server http;
  std::thread thread;
  bool bound = false;

  explicit Impl(session::SessionManager& m) : sessions(m) { routes(); }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Maps chemflow and JSON errors onto HTTP responses.
  static httplib::Server::Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), to_string(e.code()), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "invalid_argument", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  std::shared_ptr<session::Session> session_of(const httplib::Request& req) const {
    return sessions.get(req.matches[1].str());
  }

  void routes() {
    http.Get("/healthz", guarded([](const httplib::Request&, httplib::Response& res) {
      send_json(res, {{"status", "ok"}});
    }));

    http.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto body = body_of(req);
      auto task = body.value("task", std::string{});
      std::optional<json> config;
      if (body.contains("config")) {
        if (!body["config"].is_object()) throw Error(Errc::invalid_argument, "'config' must be an object");
        config = body["config"];
      }
      std::vector<agent::Breakpoint> bps;
      for (const auto& b : body.value("breakpoints", json::array()))
        bps.push_back(breakpoint_of(required_string(b, "agent"), b.value("kind", std::string{})));
      bool start = body.value("start", true);
      auto s = sessions.create(task, config, false);
      for (const auto& b : bps) s->add_breakpoint(b);
      if (start) s->start();
      res.set_header("Location", "/sessions/" + s->id());
      send_json(res, s->info(), 201);
    }));

    http.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
      json arr = json::array();
      for (const auto& s : sessions.list()) arr.push_back(s->info());
      send_json(res, arr);
    }));

    http.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, session_of(req)->info());
    }));

    http.Post(R"(/sessions/([^/]+)/message)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = session_of(req);
      auto body = body_of(req);
      s->post_message(required_string(body, "agent"), required_string(body, "text"));
      send_json(res, {{"queued", true}}, 202);
    }));

    http.Get(R"(/sessions/([^/]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = session_of(req);
      auto after = static_cast<std::uint64_t>(int_param(req, "after", 0));
      auto wait = std::min<long long>(int_param(req, "wait_ms", 0), kMaxWaitMs);
      trace::EventFilter f;
      if (auto a = param(req, "agent"); !a.empty()) f.agent = a;
      if (auto k = param(req, "kind"); !k.empty()) f.kind = kind_of(k);
      auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(wait);
      auto out = s->events_json(after, f);
      while (out["events"].empty() && std::chrono::steady_clock::now() < deadline) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        auto cursor = std::max<std::uint64_t>(after, out["last_seq"].get<std::uint64_t>());
        if (!s->trace().wait_for_events(cursor, left)) break;
        out = s->events_json(after, f);
      }
      send_json(res, out);
    }));

    http.Post(R"(/sessions/([^/]+)/pause)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = session_of(req);
      s->pause();
      send_json(res, {{"state", agent::to_string(s->state())}, {"pause_requested", true}}, 202);
    }));

    http.Post(R"(/sessions/([^/]+)/resume)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = session_of(req);
      s->resume();
      send_json(res, {{"state", agent::to_string(s->state())}});
    }));

    http.Get(R"(/sessions/([^/]+)/breakpoints)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, breakpoints_json(*session_of(req)));
    }));

    http.Post(R"(/sessions/([^/]+)/breakpoints)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = session_of(req);
      auto body = body_of(req);
      s->add_breakpoint(breakpoint_of(required_string(body, "agent"), body.value("kind", std::string{})));
      send_json(res, breakpoints_json(*s), 201);
    }));

    http.Delete(R"(/sessions/([^/]+)/breakpoints)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = session_of(req);
      s->remove_breakpoint(breakpoint_of(param(req, "agent"), param(req, "kind")));
      send_json(res, breakpoints_json(*s));
    }));

    http.Get(R"(/sessions/([^/]+)/graph)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, session_of(req)->graph());
    }));

    http.Get(R"(/sessions/([^/]+)/files)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, session_of(req)->list_files(param(req, "path")));
    }));

    http.Get(R"(/sessions/([^/]+)/file)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      if (!req.has_param("path")) throw Error(Errc::invalid_argument, "missing query parameter 'path'");
      res.set_content(session_of(req)->read_file(req.get_param_value("path")), "text/plain");
    }));

    http.Get(R"(/sessions/([^/]+)/export/notebook)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = session_of(req);
      auto nb = s->notebook();
      res.set_header("Content-Disposition", "attachment; filename=\"" + s->id() + ".ipynb\"");
      res.set_content(nb.dump(1), "application/x-ipynb+json");
    }));

    http.Get(R"(/sessions/([^/]+)/export/log)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = session_of(req);
      res.set_header("Content-Disposition", "attachment; filename=\"" + s->id() + ".jsonl\"");
      res.set_content(trace::export_log(s->trace().events()), "application/x-ndjson");
    }));
  }
};

Server::Server(session::SessionManager& sessions) : impl_(std::make_unique<Impl>(sessions)) {}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::unavailable, "cannot bind " + host + ":" + std::to_string(port));
  impl_->bound = true;
  return bound;
}

void Server::listen() {
  if (!impl_->bound) throw Error(Errc::invalid_argument, "server is not bound");
  impl_->http.listen_after_bind();
}

int Server::start(const std::string& host, int port) {
  int bound = bind(host, port);
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return bound;
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace chemflow::service
