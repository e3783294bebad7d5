// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/resp.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "esg/errors.hpp"

namespace esg::resp {

namespace {

struct AddrInfoDeleter {
  void operator()(addrinfo* p) const { freeaddrinfo(p); }
};

int connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* raw = nullptr;
  const std::string service = std::to_string(port);
  if (getaddrinfo(host.c_str(), service.c_str(), &hints, &raw) != 0) {
    throw BrokerUnavailable("cannot resolve " + host);
  }
  std::unique_ptr<addrinfo, AddrInfoDeleter> list(raw);
  for (addrinfo* it = list.get(); it; it = it->ai_next) {
    int fd = ::socket(it->ai_family, it->ai_socktype, it->ai_protocol);
    if (fd < 0) {
      continue;
    }
    if (::connect(fd, it->ai_addr, it->ai_addrlen) == 0) {
      return fd;
    }
    ::close(fd);
  }
  throw BrokerUnavailable("cannot connect to " + host + ":" + service);
}

}  // namespace

Connection::Connection(const Target& target, Duration io_timeout) : io_timeout_(io_timeout) {
  fd_ = connect_tcp(target.host, target.port);
  set_read_timeout(io_timeout_);
  if (target.password) {
    auto reply = command({"AUTH", *target.password});
    if (!reply.is_ok()) {
      fail("authentication rejected");
    }
  }
  if (target.database != 0) {
    auto reply = command({"SELECT", std::to_string(target.database)});
    if (!reply.is_ok()) {
      fail("cannot select database " + std::to_string(target.database));
    }
  }
}

Connection::~Connection() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

void Connection::set_read_timeout(Duration timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

void Connection::fail(const std::string& what) {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  throw BrokerUnavailable(what);
}

void Connection::send_all(const std::string& bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) {
      fail(std::string("send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string Connection::read_line() {
  for (;;) {
    auto pos = buffer_.find("\r\n");
    if (pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 2);
      return line;
    }
    char chunk[4096];
    ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n <= 0) {
      fail(n == 0 ? "connection closed" : std::string("recv failed: ") + std::strerror(errno));
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string Connection::read_exact(std::size_t n) {
  while (buffer_.size() < n) {
    char chunk[4096];
    ssize_t got = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (got <= 0) {
      fail(got == 0 ? "connection closed" : std::string("recv failed: ") + std::strerror(errno));
    }
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
  std::string out = buffer_.substr(0, n);
  buffer_.erase(0, n);
  return out;
}

Value Connection::read_value() {
  const std::string line = read_line();
  if (line.empty()) {
    fail("empty reply line");
  }
  Value v;
  const char type = line[0];
  const std::string rest = line.substr(1);
  switch (type) {
    case '+':
      v.kind = Value::Kind::kSimple;
      v.text = rest;
      return v;
    case '-':
      v.kind = Value::Kind::kError;
      v.text = rest;
      return v;
    case ':':
      v.kind = Value::Kind::kInteger;
      v.integer = std::stoll(rest);
      return v;
    case '$': {
      v.kind = Value::Kind::kBulk;
      const long long n = std::stoll(rest);
      if (n < 0) {
        v.is_null = true;
        return v;
      }
      v.text = read_exact(static_cast<std::size_t>(n));
      read_exact(2);  // trailing CRLF
      return v;
    }
    case '*': {
      v.kind = Value::Kind::kArray;
      const long long n = std::stoll(rest);
      if (n < 0) {
        v.is_null = true;
        return v;
      }
      v.items.reserve(static_cast<std::size_t>(n));
      for (long long i = 0; i < n; ++i) {
        v.items.push_back(read_value());
      }
      return v;
    }
    default:
      fail(std::string("unexpected reply type '") + type + "'");
  }
  return v;  // unreachable
}

Value Connection::command(const std::vector<std::string>& parts, Duration extra_wait) {
  if (fd_ < 0) {
    throw BrokerUnavailable("connection already failed");
  }
  std::string wire = "*" + std::to_string(parts.size()) + "\r\n";
  for (const auto& part : parts) {
    wire += "$" + std::to_string(part.size()) + "\r\n";
    wire += part;
    wire += "\r\n";
  }
  if (extra_wait.count() > 0) {
    set_read_timeout(io_timeout_ + extra_wait);
  }
  send_all(wire);
  Value reply = read_value();
  if (extra_wait.count() > 0) {
    set_read_timeout(io_timeout_);
  }
  return reply;
}

std::string expect_simple(const Value& v) {
  if (v.kind == Value::Kind::kError) {
    throw BrokerError("server error: " + v.text);
  }
  if (v.kind != Value::Kind::kSimple) {
    throw BrokerError("expected simple string reply");
  }
  return v.text;
}

std::int64_t expect_integer(const Value& v) {
  if (v.kind == Value::Kind::kError) {
    throw BrokerError("server error: " + v.text);
  }
  if (v.kind != Value::Kind::kInteger) {
    throw BrokerError("expected integer reply");
  }
  return v.integer;
}

std::optional<std::string> expect_bulk(const Value& v) {
  if (v.kind == Value::Kind::kError) {
    throw BrokerError("server error: " + v.text);
  }
  if (v.kind == Value::Kind::kBulk) {
    if (v.is_null) {
      return std::nullopt;
    }
    return v.text;
  }
  if (v.kind == Value::Kind::kSimple) {
    return v.text;
  }
  throw BrokerError("expected bulk string reply");
}

std::vector<Value> expect_array(const Value& v) {
  if (v.kind == Value::Kind::kError) {
    throw BrokerError("server error: " + v.text);
  }
  if (v.kind != Value::Kind::kArray || v.is_null) {
    return {};
  }
  return v.items;
}

}  // namespace esg::resp
