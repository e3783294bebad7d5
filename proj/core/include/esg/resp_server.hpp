// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace esg::resp {

// Minimal in-memory RESP2 key-value store: the command subset a RespBroker
// needs (strings, lists, blocking pop) plus introspection (KEYS, DBSIZE).
// Volatile by design; it exists so a full multi-process stack can run
// without an external store. Not a cache, not persistent, not a cluster.
class RespServer {
 public:
  explicit RespServer(std::string bind_address = "127.0.0.1", int port = 0,
                      std::optional<std::string> password = std::nullopt);
  ~RespServer();

  RespServer(const RespServer&) = delete;
  RespServer& operator=(const RespServer&) = delete;

  // Binds and starts the accept loop; returns the bound port (useful with
  // port 0). Throws Error when the socket cannot be bound.
  int start();

  // start() + block until stop().
  void run();

  void stop();

  int port() const { return port_; }

  // Number of keys in a database, for bounded-growth checks.
  std::size_t key_count(int database) const;

 private:
  struct Database {
    std::map<std::string, std::string> strings;
    std::map<std::string, std::deque<std::string>> lists;
  };
  struct Store;

  void accept_loop(int listen_fd);
  void serve_connection(int fd);

  std::string bind_address_;
  int port_;
  std::optional<std::string> password_;
  std::shared_ptr<Store> store_;
  std::atomic<bool> stopping_{false};
  int listen_fd_ = -1;
  std::thread accept_thread_;
  std::mutex workers_mutex_;
  std::vector<std::thread> workers_;
  std::vector<int> open_fds_;  // shut down on stop() so reads unblock
};

}  // namespace esg::resp
