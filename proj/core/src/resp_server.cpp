// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/resp_server.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstring>

#include "esg/errors.hpp"

namespace esg::resp {

namespace {

constexpr int kDatabases = 16;

std::string upper(std::string text) {
  for (auto& c : text) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return text;
}

// Glob with '*' and '?', enough for KEYS introspection.
bool glob_match(const char* pattern, const char* text) {
  if (*pattern == '\0') return *text == '\0';
  if (*pattern == '*') {
    for (const char* t = text;; ++t) {
      if (glob_match(pattern + 1, t)) return true;
      if (*t == '\0') return false;
    }
  }
  if (*text == '\0') return false;
  if (*pattern == '?' || *pattern == *text) return glob_match(pattern + 1, text + 1);
  return false;
}

struct Reader {
  int fd;
  std::string buffer;
  std::size_t pos = 0;

  bool fill() {
    char chunk[4096];
    auto got = ::recv(fd, chunk, sizeof chunk, 0);
    if (got <= 0) return false;
    buffer.append(chunk, static_cast<std::size_t>(got));
    return true;
  }

  bool read_line(std::string& line) {
    for (;;) {
      auto nl = buffer.find("\r\n", pos);
      if (nl != std::string::npos) {
        line = buffer.substr(pos, nl - pos);
        pos = nl + 2;
        compact();
        return true;
      }
      if (!fill()) return false;
    }
  }

  bool read_exact(std::size_t n, std::string& out) {
    while (buffer.size() - pos < n) {
      if (!fill()) return false;
    }
    out = buffer.substr(pos, n);
    pos += n;
    compact();
    return true;
  }

  void compact() {
    if (pos > 65536) {
      buffer.erase(0, pos);
      pos = 0;
    }
  }
};

bool send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    auto n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

std::string simple(const std::string& text) { return "+" + text + "\r\n"; }
std::string error_reply(const std::string& text) { return "-" + text + "\r\n"; }
std::string integer(long long n) { return ":" + std::to_string(n) + "\r\n"; }
std::string bulk(const std::string& data) {
  return "$" + std::to_string(data.size()) + "\r\n" + data + "\r\n";
}
constexpr const char* kNilBulk = "$-1\r\n";
constexpr const char* kNilArray = "*-1\r\n";

// Reads one client command: an array of bulk strings. Returns false on
// connection loss, sets `bad` on protocol garbage.
bool read_command(Reader& reader, std::vector<std::string>& out, bool& bad) {
  out.clear();
  bad = false;
  std::string line;
  if (!reader.read_line(line)) return false;
  if (line.empty() || line[0] != '*') {
    bad = true;
    return true;
  }
  long count = 0;
  try {
    count = std::stol(line.substr(1));
  } catch (const std::exception&) {
    bad = true;
    return true;
  }
  if (count < 0 || count > 1024 * 1024) {
    bad = true;
    return true;
  }
  for (long i = 0; i < count; ++i) {
    if (!reader.read_line(line)) return false;
    if (line.empty() || line[0] != '$') {
      bad = true;
      return true;
    }
    long len = 0;
    try {
      len = std::stol(line.substr(1));
    } catch (const std::exception&) {
      bad = true;
      return true;
    }
    if (len < 0 || len > 64 * 1024 * 1024) {
      bad = true;
      return true;
    }
    std::string payload;
    if (!reader.read_exact(static_cast<std::size_t>(len), payload)) return false;
    std::string crlf;
    if (!reader.read_exact(2, crlf)) return false;
    out.push_back(std::move(payload));
  }
  return true;
}

}  // namespace

struct RespServer::Store {
  std::mutex mutex;
  std::condition_variable list_grew;
  std::array<Database, kDatabases> databases;
  std::atomic<bool> stopping{false};
};

RespServer::RespServer(std::string bind_address, int port, std::optional<std::string> password)
    : bind_address_(std::move(bind_address)),
      port_(port),
      password_(std::move(password)),
      store_(std::make_shared<Store>()) {}

RespServer::~RespServer() { stop(); }

int RespServer::start() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* found = nullptr;
  auto service = std::to_string(port_);
  if (::getaddrinfo(bind_address_.c_str(), service.c_str(), &hints, &found) != 0 || !found) {
    throw Error("cannot resolve bind address: " + bind_address_);
  }
  int fd = ::socket(found->ai_family, found->ai_socktype, found->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(found);
    throw Error("cannot create listen socket");
  }
  int yes = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  if (::bind(fd, found->ai_addr, found->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
    ::freeaddrinfo(found);
    ::close(fd);
    throw Error("cannot bind " + bind_address_ + ":" + service);
  }
  ::freeaddrinfo(found);

  sockaddr_storage local{};
  socklen_t local_len = sizeof local;
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&local), &local_len) == 0) {
    if (local.ss_family == AF_INET) {
      port_ = ntohs(reinterpret_cast<sockaddr_in*>(&local)->sin_port);
    } else if (local.ss_family == AF_INET6) {
      port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&local)->sin6_port);
    }
  }

  listen_fd_ = fd;
  accept_thread_ = std::thread([this, fd] { accept_loop(fd); });
  return port_;
}

void RespServer::run() {
  start();
  if (accept_thread_.joinable()) accept_thread_.join();
}

void RespServer::stop() {
  bool was_stopping = stopping_.exchange(true);
  if (was_stopping) return;
  store_->stopping.store(true);
  {
    std::lock_guard<std::mutex> lock(store_->mutex);
  }
  store_->list_grew.notify_all();
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (accept_thread_.joinable() && accept_thread_.get_id() != std::this_thread::get_id()) {
    accept_thread_.join();
  }
  std::vector<std::thread> workers;
  {
    std::lock_guard<std::mutex> lock(workers_mutex_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& worker : workers) {
    if (worker.joinable()) worker.join();
  }
}

std::size_t RespServer::key_count(int database) const {
  if (database < 0 || database >= kDatabases) return 0;
  std::lock_guard<std::mutex> lock(store_->mutex);
  const auto& db = store_->databases[static_cast<std::size_t>(database)];
  return db.strings.size() + db.lists.size();
}

void RespServer::accept_loop(int listen_fd) {
  while (!stopping_.load()) {
    int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_.load()) break;
      continue;
    }
    int yes = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
    std::lock_guard<std::mutex> lock(workers_mutex_);
    open_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void RespServer::serve_connection(int fd) {
  auto store = store_;
  Reader reader{fd, {}, 0};
  int db_index = 0;
  bool authenticated = !password_.has_value();

  std::vector<std::string> cmd;
  bool bad = false;
  while (!store->stopping.load() && read_command(reader, cmd, bad)) {
    if (bad) {
      send_all(fd, error_reply("ERR Protocol error"));
      break;
    }
    if (cmd.empty()) continue;
    auto verb = upper(cmd[0]);

    if (verb == "QUIT") {
      send_all(fd, simple("OK"));
      break;
    }
    if (verb == "AUTH") {
      if (!password_) {
        send_all(fd, error_reply("ERR Client sent AUTH, but no password is set"));
      } else if (cmd.size() == 2 && cmd[1] == *password_) {
        authenticated = true;
        send_all(fd, simple("OK"));
      } else {
        send_all(fd, error_reply("WRONGPASS invalid password"));
      }
      continue;
    }
    if (!authenticated) {
      send_all(fd, error_reply("NOAUTH Authentication required"));
      continue;
    }
    if (verb == "PING") {
      send_all(fd, cmd.size() > 1 ? bulk(cmd[1]) : simple("PONG"));
      continue;
    }
    if (verb == "SELECT") {
      int index = -1;
      if (cmd.size() == 2) {
        try {
          index = std::stoi(cmd[1]);
        } catch (const std::exception&) {
        }
      }
      if (index < 0 || index >= kDatabases) {
        send_all(fd, error_reply("ERR DB index is out of range"));
      } else {
        db_index = index;
        send_all(fd, simple("OK"));
      }
      continue;
    }

    std::string reply;
    {
      std::unique_lock<std::mutex> lock(store->mutex);
      auto& db = store->databases[static_cast<std::size_t>(db_index)];

      if (verb == "GET" && cmd.size() == 2) {
        auto it = db.strings.find(cmd[1]);
        reply = it == db.strings.end() ? kNilBulk : bulk(it->second);
      } else if (verb == "SET" && cmd.size() >= 3) {
        bool nx = false;
        bool xx = false;
        bool ok_flags = true;
        for (std::size_t i = 3; i < cmd.size(); ++i) {
          auto flag = upper(cmd[i]);
          if (flag == "NX") {
            nx = true;
          } else if (flag == "XX") {
            xx = true;
          } else {
            ok_flags = false;
          }
        }
        bool exists = db.strings.count(cmd[1]) != 0;
        if (!ok_flags) {
          reply = error_reply("ERR syntax error");
        } else if ((nx && exists) || (xx && !exists)) {
          reply = kNilBulk;
        } else {
          db.strings[cmd[1]] = cmd[2];
          reply = simple("OK");
        }
      } else if (verb == "DEL" && cmd.size() >= 2) {
        long long removed = 0;
        for (std::size_t i = 1; i < cmd.size(); ++i) {
          removed += db.strings.erase(cmd[i]);
          removed += db.lists.erase(cmd[i]);
        }
        reply = integer(removed);
      } else if (verb == "EXISTS" && cmd.size() >= 2) {
        long long found = 0;
        for (std::size_t i = 1; i < cmd.size(); ++i) {
          if (db.strings.count(cmd[i]) != 0) ++found;
          auto it = db.lists.find(cmd[i]);
          if (it != db.lists.end() && !it->second.empty()) ++found;
        }
        reply = integer(found);
      } else if ((verb == "LPUSH" || verb == "RPUSH") && cmd.size() >= 3) {
        auto& list = db.lists[cmd[1]];
        for (std::size_t i = 2; i < cmd.size(); ++i) {
          if (verb == "LPUSH") {
            list.push_front(cmd[i]);
          } else {
            list.push_back(cmd[i]);
          }
        }
        reply = integer(static_cast<long long>(list.size()));
        store->list_grew.notify_all();
      } else if (verb == "RPOP" && cmd.size() == 2) {
        auto it = db.lists.find(cmd[1]);
        if (it == db.lists.end() || it->second.empty()) {
          reply = kNilBulk;
        } else {
          reply = bulk(it->second.back());
          it->second.pop_back();
          if (it->second.empty()) db.lists.erase(it);
        }
      } else if (verb == "BRPOP" && cmd.size() == 3) {
        double timeout = 0.0;
        try {
          timeout = std::stod(cmd[2]);
        } catch (const std::exception&) {
          timeout = -1.0;
        }
        if (timeout < 0.0) {
          reply = error_reply("ERR timeout is not a float or out of range");
        } else {
          auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(timeout));
          for (;;) {
            auto it = db.lists.find(cmd[1]);
            if (it != db.lists.end() && !it->second.empty()) {
              reply = "*2\r\n" + bulk(cmd[1]) + bulk(it->second.back());
              it->second.pop_back();
              if (it->second.empty()) db.lists.erase(it);
              break;
            }
            if (store->stopping.load()) {
              reply = kNilArray;
              break;
            }
            if (timeout == 0.0) {
              store->list_grew.wait(lock);
            } else if (store->list_grew.wait_until(lock, deadline) == std::cv_status::timeout) {
              auto again = db.lists.find(cmd[1]);
              if (again == db.lists.end() || again->second.empty()) {
                reply = kNilArray;
                break;
              }
            }
          }
        }
      } else if (verb == "LRANGE" && cmd.size() == 4) {
        long long start = 0;
        long long stop_at = 0;
        try {
          start = std::stoll(cmd[2]);
          stop_at = std::stoll(cmd[3]);
        } catch (const std::exception&) {
          start = 1;
          stop_at = 0;
        }
        auto it = db.lists.find(cmd[1]);
        auto size = it == db.lists.end() ? 0LL : static_cast<long long>(it->second.size());
        if (start < 0) start = std::max(0LL, size + start);
        if (stop_at < 0) stop_at = size + stop_at;
        stop_at = std::min(stop_at, size - 1);
        if (it == db.lists.end() || start > stop_at) {
          reply = "*0\r\n";
        } else {
          reply = "*" + std::to_string(stop_at - start + 1) + "\r\n";
          for (long long i = start; i <= stop_at; ++i) {
            reply += bulk(it->second[static_cast<std::size_t>(i)]);
          }
        }
      } else if (verb == "LREM" && cmd.size() == 4) {
        long long count = 0;
        try {
          count = std::stoll(cmd[2]);
        } catch (const std::exception&) {
        }
        long long removed = 0;
        auto it = db.lists.find(cmd[1]);
        if (it != db.lists.end()) {
          auto& list = it->second;
          auto matches = [&](const std::string& v) { return v == cmd[3]; };
          if (count >= 0) {
            long long budget = count == 0 ? static_cast<long long>(list.size()) : count;
            for (auto pos = list.begin(); pos != list.end() && removed < budget;) {
              if (matches(*pos)) {
                pos = list.erase(pos);
                ++removed;
              } else {
                ++pos;
              }
            }
          } else {
            long long budget = -count;
            for (auto pos = list.rbegin(); pos != list.rend() && removed < budget;) {
              if (matches(*pos)) {
                pos = decltype(pos)(list.erase(std::next(pos).base()));
                ++removed;
              } else {
                ++pos;
              }
            }
          }
          if (list.empty()) db.lists.erase(it);
        }
        reply = integer(removed);
      } else if (verb == "KEYS" && cmd.size() == 2) {
        std::vector<const std::string*> keys;
        for (const auto& [key, value] : db.strings) {
          if (glob_match(cmd[1].c_str(), key.c_str())) keys.push_back(&key);
        }
        for (const auto& [key, value] : db.lists) {
          if (glob_match(cmd[1].c_str(), key.c_str())) keys.push_back(&key);
        }
        reply = "*" + std::to_string(keys.size()) + "\r\n";
        for (const auto* key : keys) reply += bulk(*key);
      } else if (verb == "DBSIZE" && cmd.size() == 1) {
        reply = integer(static_cast<long long>(db.strings.size() + db.lists.size()));
      } else if (verb == "FLUSHDB" && cmd.size() == 1) {
        db.strings.clear();
        db.lists.clear();
        reply = simple("OK");
      } else {
        reply = error_reply("ERR unknown command '" + cmd[0] + "'");
      }
    }
    if (!send_all(fd, reply)) break;
  }
  {
    std::lock_guard<std::mutex> lock(workers_mutex_);
    open_fds_.erase(std::remove(open_fds_.begin(), open_fds_.end(), fd), open_fds_.end());
  }
  ::close(fd);
}

}  // namespace esg::resp
