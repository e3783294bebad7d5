// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "esg/broker.hpp"
#include "esg/resp.hpp"

namespace esg {

// Broker over any RESP2-compatible key-value store.
//
// Key layout, namespaced by service name:
//   {ns}:{version}:{kind}:queue   pending task ids (LPUSH in, BRPOP out)
//   {ns}:tasks:index              ids of all live tasks, for scans
//   {ns}:task:{id}:envelope       TaskEnvelope JSON; created last-deleted,
//                                 so its presence defines task existence
//   {ns}:task:{id}:status         "queued" | "running" | "ready"
//   {ns}:task:{id}:meta           {"created_at", "attempt"}
//   {ns}:task:{id}:outcome        TaskOutcome JSON, write-once
//   {ns}:task:{id}:fetched        first-fetch stamp, write-once (SET NX)
//   {ns}:task:{id}:claim          ClaimLease JSON while a worker holds it
class RespBroker : public Broker {
 public:
  RespBroker(resp::Target target, std::string key_namespace);

  void enqueue(const TaskEnvelope& envelope) override;
  std::optional<TaskEnvelope> claim(const VersionTag& version, EndpointKind kind,
                                    const std::string& worker_id, Duration visibility,
                                    Duration wait) override;
  bool renew_claim(const TaskId& task_id, const std::string& worker_id,
                   Duration visibility) override;
  std::size_t reap_expired_claims(TimePoint now) override;
  void set_status(const TaskId& task_id, TaskState status) override;
  TaskState get_status(const TaskId& task_id) override;
  void put_outcome(const TaskOutcome& outcome) override;
  std::optional<TaskOutcome> fetch_outcome(const TaskId& task_id, TimePoint now) override;
  void delete_task(const TaskId& task_id) override;
  std::vector<TaskScanEntry> scan_tasks() override;

 private:
  // Borrowed pool connection, returned on destruction unless it failed.
  class Borrowed {
   public:
    Borrowed(RespBroker& owner, std::unique_ptr<resp::Connection> connection)
        : owner_(owner), connection_(std::move(connection)) {}
    ~Borrowed();
    resp::Connection& operator*() { return *connection_; }
    resp::Connection* operator->() { return connection_.get(); }

   private:
    RespBroker& owner_;
    std::unique_ptr<resp::Connection> connection_;
  };

  Borrowed borrow();

  std::string queue_key(const VersionTag& version, EndpointKind kind) const;
  std::string task_key(const TaskId& id, const char* suffix) const;
  std::string index_key() const;

  resp::Target target_;
  std::string ns_;
  std::mutex pool_mutex_;
  std::vector<std::unique_ptr<resp::Connection>> idle_;
};

}  // namespace esg
