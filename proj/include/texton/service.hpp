// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
// HTTP edit-session service. EditService implements the routes as a pure
// request -> response function; HttpServer binds it to a socket.
#pragma once

#include "texton/types.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

namespace texton {

inline constexpr std::size_t kUndoLimit = 64;

struct SessionSnapshot {
    std::string id;
    std::uint64_t revision = 0;
    GaussianSet set;
    std::size_t historySize = 0;
};

class SessionNotFound : public Error {
public:
    explicit SessionNotFound(const std::string &id) : Error("unknown session " + id), mId(id) {}
    const std::string &id() const { return mId; }

private:
    std::string mId;
};

class SessionConflict : public Error {
public:
    using Error::Error;
};

/// Sessions with per-session exclusive edits and a bounded undo history.
class SessionStore {
public:
    explicit SessionStore(std::size_t undoLimit = kUndoLimit) : mUndoLimit(undoLimit) {}

    /// Validates and stores `set`; ids are unique for the store's lifetime.
    std::string create(GaussianSet set);

    SessionSnapshot snapshot(const std::string &id) const;

    /// Applies `edit` under the session lock. The result must validate. Throws
    /// SessionConflict when `expectedRevision` is given and stale.
    SessionSnapshot apply(const std::string &id, const std::function<GaussianSet(const GaussianSet &)> &edit,
                          std::optional<std::uint64_t> expectedRevision = std::nullopt);

    /// Restores the previous state. Throws SessionConflict on an empty history.
    SessionSnapshot undo(const std::string &id);

    std::size_t sessionCount() const;

private:
    struct Session {
        mutable std::mutex mutex;
        GaussianSet current;
        std::deque<GaussianSet> history;
        std::uint64_t revision = 0;
    };

    std::shared_ptr<Session> find(const std::string &id) const;

    std::size_t mUndoLimit;
    mutable std::shared_mutex mMutex;
    std::map<std::string, std::shared_ptr<Session>> mSessions;
    std::uint64_t mCounter = 0;
};

struct HttpRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct HttpResponse {
    int status = 200;
    std::string contentType = "application/json";
    std::string body;
};

/// Routes:
///   POST /sessions                   document, {"document": ...} or {"synth": {...}}
///   GET  /sessions/{id}
///   POST /sessions/{id}/edits        {"op": ..., "expected_revision"?: n, ...}
///   POST /sessions/{id}/undo
///   GET  /sessions/{id}/render?w=&h=
///   GET  /healthz
class EditService {
public:
    HttpResponse handle(const HttpRequest &request);
    SessionStore &store() { return mStore; }

private:
    HttpResponse createSession(const HttpRequest &request);
    HttpResponse applyEdit(const std::string &id, const HttpRequest &request);
    HttpResponse render(const std::string &id, const HttpRequest &request);

    SessionStore mStore;
};

/// Socket front end for an EditService.
class HttpServer {
public:
    explicit HttpServer(EditService &service);
    ~HttpServer();
    HttpServer(const HttpServer &)            = delete;
    HttpServer &operator=(const HttpServer &) = delete;

    /// Binds host:port (port 0 picks a free one) and returns the bound port.
    int bind(const std::string &host, int port);
    /// Serves until stop(); blocks.
    void serve();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> mImpl;
};

/// "host:port" or ":port" or "port".
std::pair<std::string, int> parseAddress(const std::string &address);

} // namespace texton
