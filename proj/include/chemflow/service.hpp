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

#pragma once

#include <memory>
#include <string>

#include "chemflow/error.hpp"
#include "chemflow/session.hpp"

namespace chemflow::service {

// HTTP status for an error code: 400, 404, 409, 503 or 500.
int http_status(Errc code);

// JSON-over-HTTP front end for a SessionManager.
//
//   POST   /sessions                         {task, config?, breakpoints?, start?}  -> 201 session info
//   GET    /sessions                                                -> [session info]
//   GET    /sessions/{id}
//   POST   /sessions/{id}/message            {agent, text}          -> 202
//   GET    /sessions/{id}/events?after=&agent=&kind=&wait_ms=
//   POST   /sessions/{id}/pause | /resume
//   GET    /sessions/{id}/breakpoints
//   POST   /sessions/{id}/breakpoints        {agent, kind}          -> 201
//   DELETE /sessions/{id}/breakpoints?agent=&kind=
//   GET    /sessions/{id}/graph
//   GET    /sessions/{id}/files?path=
//   GET    /sessions/{id}/file?path=                                -> raw bytes
//   GET    /sessions/{id}/export/notebook | /export/log             -> attachment
//   GET    /healthz
class Server {
 public:
  explicit Server(session::SessionManager& sessions);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds without serving. Port 0 picks a free port; returns the bound port.
  int bind(const std::string& host, int port);
  // Serves until stop(). Requires bind().
  void listen();
  // bind() + listen() on a background thread; returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace chemflow::service
