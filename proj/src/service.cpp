// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "texton/service.hpp"

#include "texton/core.hpp"
#include "texton/editing.hpp"
#include "texton/estimation.hpp"
#include "texton/io.hpp"
#include "texton/random.hpp"
#include "texton/splatting.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdio>
#include <regex>

namespace texton {

using Json = nlohmann::ordered_json;

// --- store -----------------------------------------------------------------

std::string SessionStore::create(GaussianSet set) {
    requireValid(set);
    auto session     = std::make_shared<Session>();
    session->current = std::move(set);
    std::unique_lock lock(mMutex);
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(mixSeed(++mCounter)));
    std::string id(buf);
    mSessions.emplace(id, std::move(session));
    return id;
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string &id) const {
    std::shared_lock lock(mMutex);
    const auto it = mSessions.find(id);
    if (it == mSessions.end()) {
        throw SessionNotFound(id);
    }
    return it->second;
}

SessionSnapshot SessionStore::snapshot(const std::string &id) const {
    const auto session = find(id);
    std::lock_guard lock(session->mutex);
    return {id, session->revision, session->current, session->history.size()};
}

SessionSnapshot SessionStore::apply(const std::string &id,
                                    const std::function<GaussianSet(const GaussianSet &)> &edit,
                                    std::optional<std::uint64_t> expectedRevision) {
    const auto session = find(id);
    std::lock_guard lock(session->mutex);
    if (expectedRevision && *expectedRevision != session->revision) {
        throw SessionConflict("revision conflict: expected " + std::to_string(*expectedRevision) + ", current " +
                              std::to_string(session->revision));
    }
    GaussianSet next = edit(session->current);
    requireValid(next);
    session->history.push_back(std::move(session->current));
    if (session->history.size() > mUndoLimit) {
        session->history.pop_front();
    }
    session->current = std::move(next);
    ++session->revision;
    return {id, session->revision, session->current, session->history.size()};
}

SessionSnapshot SessionStore::undo(const std::string &id) {
    const auto session = find(id);
    std::lock_guard lock(session->mutex);
    if (session->history.empty()) {
        throw SessionConflict("history empty");
    }
    session->current = std::move(session->history.back());
    session->history.pop_back();
    ++session->revision;
    return {id, session->revision, session->current, session->history.size()};
}

std::size_t SessionStore::sessionCount() const {
    std::shared_lock lock(mMutex);
    return mSessions.size();
}

// --- request handling ------------------------------------------------------

namespace {

class BadRequest : public Error {
public:
    using Error::Error;
};

HttpResponse json(int status, const Json &body) { return {status, "application/json", body.dump() + "\n"}; }

HttpResponse errorResponse(int status, const std::string &message, Json extra = Json::object()) {
    Json body        = Json::object();
    body["error"]    = message;
    for (auto &[k, v] : extra.items()) {
        body[k] = v;
    }
    return json(status, body);
}

Json stateJson(const SessionSnapshot &s) {
    Json body;
    body["id"]       = s.id;
    body["revision"] = s.revision;
    body["history"]  = s.historySize;
    body["document"] = Json::parse(serializeDocument({s.set, std::nullopt}));
    return body;
}

Json parseBody(const std::string &body) {
    try {
        return Json::parse(body);
    } catch (const Json::parse_error &e) {
        throw BadRequest(std::string("malformed JSON: ") + e.what());
    }
}

const Json &field(const Json &obj, const char *key) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw BadRequest(std::string("missing field '") + key + "'");
    }
    return obj.at(key);
}

double numberField(const Json &obj, const char *key) {
    const Json &v = field(obj, key);
    if (!v.is_number()) {
        throw BadRequest(std::string("field '") + key + "' must be a number");
    }
    return v.get<double>();
}

double numberOr(const Json &obj, const char *key, double fallback) {
    return obj.contains(key) ? numberField(obj, key) : fallback;
}

std::uint64_t unsignedOr(const Json &obj, const char *key, std::uint64_t fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const Json &v = obj.at(key);
    if (!v.is_number_unsigned()) {
        throw BadRequest(std::string("field '") + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::size_t indexField(const Json &obj) {
    const Json &v = field(obj, "index");
    if (!v.is_number_integer()) {
        throw BadRequest("field 'index' must be an integer");
    }
    const auto i = v.get<long long>();
    if (i < 0) {
        throw IndexError("texton index " + std::to_string(i) + " out of range", std::size_t(-1));
    }
    return std::size_t(i);
}

Vec2 vecField(const Json &obj, const char *key) {
    const Json &v = field(obj, key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw BadRequest(std::string("field '") + key + "' must be [x, y]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

std::string stringOr(const Json &obj, const char *key, const std::string &fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_string()) {
        throw BadRequest(std::string("field '") + key + "' must be a string");
    }
    return obj.at(key).get<std::string>();
}

GaussianSet documentField(const Json &obj, const char *key) {
    const Json &doc = field(obj, key);
    try {
        return parseDocument(doc.dump()).set;
    } catch (const ValidationError &) {
        throw;
    } catch (const Error &e) {
        throw BadRequest(e.what());
    }
}

ImageFrame frameField(const Json &spec) {
    if (!spec.contains("frame")) {
        return SynthLayout{}.frame;
    }
    const Json &f = spec.at("frame");
    if (f.is_array() && f.size() == 2 && f[0].is_number_integer() && f[1].is_number_integer()) {
        return {f[0].get<int>(), f[1].get<int>()};
    }
    if (f.is_string()) {
        int w = 0, h = 0;
        char tail = 0;
        if (std::sscanf(f.get<std::string>().c_str(), "%dx%d%c", &w, &h, &tail) == 2) {
            return {w, h};
        }
    }
    throw BadRequest("field 'frame' must be [w, h] or \"WxH\"");
}

GaussianSet synthFromSpec(const Json &spec) {
    SynthLayout layout;
    layout.frame      = frameField(spec);
    layout.count      = int(numberOr(spec, "k", layout.count));
    layout.featureDim = int(numberOr(spec, "nf", kDefaultFeatureDim));
    layout.isotropic  = spec.contains("isotropic") && spec.at("isotropic").is_boolean() && spec.at("isotropic").get<bool>();
    const std::string arrangement = stringOr(spec, "arrangement", "grid");
    if (arrangement == "random") {
        layout.arrangement = SynthLayout::Arrangement::Random;
    } else if (arrangement != "grid") {
        throw BadRequest("arrangement must be 'grid' or 'random'");
    }
    if (layout.frame.width < 1 || layout.frame.height < 1 || layout.count < 0 || layout.featureDim < 1) {
        throw BadRequest("synth spec out of range");
    }
    return synthWorld(layout, unsignedOr(spec, "seed", 0)).truth;
}

std::function<GaussianSet(const GaussianSet &)> editFromCommand(const Json &cmd) {
    const std::string op = stringOr(cmd, "op", "");
    if (op == "move") {
        const std::size_t index = indexField(cmd);
        const Vec2 delta        = vecField(cmd, "delta");
        return [=](const GaussianSet &s) { return transformTexton(s, index, MoveOp{delta}); };
    }
    if (op == "scale") {
        const std::size_t index = indexField(cmd);
        ScaleOp scale;
        if (cmd.contains("matrix")) {
            const Json &m = cmd.at("matrix");
            if (!m.is_array() || m.size() != 2) {
                throw BadRequest("field 'matrix' must be [[a, b], [c, d]]");
            }
            Json rows = Json::object({{"r0", m[0]}, {"r1", m[1]}});
            const Vec2 r0 = vecField(rows, "r0"), r1 = vecField(rows, "r1");
            Mat2 mat;
            mat << r0.x(), r0.y(), r1.x(), r1.y();
            scale = ScaleOp::by(mat);
        } else {
            scale = ScaleOp::by(numberField(cmd, "s"));
        }
        return [=](const GaussianSet &s) { return transformTexton(s, index, scale); };
    }
    if (op == "rotate") {
        const std::size_t index = indexField(cmd);
        const double theta      = numberField(cmd, "theta");
        return [=](const GaussianSet &s) { return transformTexton(s, index, RotateOp{theta}); };
    }
    if (op == "reshuffle") {
        const std::uint64_t seed = unsignedOr(cmd, "seed", 0);
        const std::string mode   = stringOr(cmd, "mode", "hard");
        if (mode != "hard" && mode != "soft") {
            throw BadRequest("mode must be 'hard' or 'soft'");
        }
        const double gamma = numberOr(cmd, "gamma", 0.5);
        return [=](const GaussianSet &s) {
            return reshuffle(s, ReshufflePlan::random(s.size(), seed,
                                                      mode == "hard" ? ReshufflePlan::Mode::Hard
                                                                     : ReshufflePlan::Mode::Soft,
                                                      gamma));
        };
    }
    if (op == "vary") {
        const VariationEdit edit{numberOr(cmd, "df", 1.0), numberOr(cmd, "du", 1.0)};
        return [=](const GaussianSet &s) { return modifyVariations(s, edit); };
    }
    if (op == "transfer") {
        const GaussianSet appearance = documentField(cmd, "appearance");
        const std::string mode       = stringOr(cmd, "mode", "mean");
        const std::uint64_t seed     = unsignedOr(cmd, "seed", 0);
        if (mode == "mean") {
            return [=](const GaussianSet &s) { return transferMeanAlign(s, appearance); };
        }
        if (mode == "replace") {
            return [=](const GaussianSet &s) { return transferReplace(s, appearance, seed); };
        }
        throw BadRequest("mode must be 'mean' or 'replace'");
    }
    if (op == "interpolate") {
        const GaussianSet other  = documentField(cmd, "other");
        const double eta         = numberField(cmd, "eta");
        const std::uint64_t seed = unsignedOr(cmd, "seed", 0);
        return [=](const GaussianSet &s) { return interpolate(s, other, eta, seed); };
    }
    if (op == "rescale") {
        const double factor = numberField(cmd, "s");
        const Vec2 anchor   = cmd.contains("anchor") ? vecField(cmd, "anchor") : Vec2(Vec2::Zero());
        return [=](const GaussianSet &s) { return rescaleGaussians(s, factor, anchor); };
    }
    throw BadRequest("unknown op '" + op + "'");
}

int intQuery(const HttpRequest &request, const char *key, int fallback) {
    const auto it = request.query.find(key);
    if (it == request.query.end()) {
        return fallback;
    }
    int v     = 0;
    char tail = 0;
    if (std::sscanf(it->second.c_str(), "%d%c", &v, &tail) != 1 || v < 1 || v > 8192) {
        throw BadRequest(std::string("query parameter '") + key + "' must be an integer in [1, 8192]");
    }
    return v;
}

} // namespace

HttpResponse EditService::createSession(const HttpRequest &request) {
    const Json body = parseBody(request.body);
    GaussianSet set;
    if (body.is_object() && body.contains("synth")) {
        set = synthFromSpec(body.at("synth"));
    } else if (body.is_object() && body.contains("document")) {
        set = documentField(body, "document");
    } else if (body.is_object() && body.contains("format_version")) {
        try {
            set = parseDocument(request.body).set;
        } catch (const ValidationError &) {
            throw;
        } catch (const Error &e) {
            throw BadRequest(e.what());
        }
    } else {
        throw BadRequest("expected a texton document, {\"document\": ...} or {\"synth\": ...}");
    }
    const std::string id = mStore.create(std::move(set));
    return json(201, stateJson(mStore.snapshot(id)));
}

HttpResponse EditService::applyEdit(const std::string &id, const HttpRequest &request) {
    mStore.snapshot(id); // 404 before parsing the command
    const Json cmd = parseBody(request.body);
    std::optional<std::uint64_t> expected;
    if (cmd.is_object() && cmd.contains("expected_revision")) {
        expected = unsignedOr(cmd, "expected_revision", 0);
    }
    return json(200, stateJson(mStore.apply(id, editFromCommand(cmd), expected)));
}

HttpResponse EditService::render(const std::string &id, const HttpRequest &request) {
    const SessionSnapshot s = mStore.snapshot(id);
    const int w             = intQuery(request, "w", s.set.frame.width);
    const int h             = intQuery(request, "h", s.set.frame.height);
    return {200, "image/png", encodePng(renderAtSize(s.set, w, h))};
}

HttpResponse EditService::handle(const HttpRequest &request) {
    static const std::regex sessionRoute(R"(^/sessions/([A-Za-z0-9_-]+)(/edits|/undo|/render)?/?$)");
    try {
        const std::string &path = request.path;
        if (path == "/healthz") {
            if (request.method != "GET") {
                return errorResponse(405, "method not allowed");
            }
            return json(200, Json{{"status", "ok"}, {"sessions", mStore.sessionCount()}});
        }
        if (path == "/sessions" || path == "/sessions/") {
            if (request.method != "POST") {
                return errorResponse(405, "method not allowed");
            }
            return createSession(request);
        }
        std::smatch m;
        if (!std::regex_match(path, m, sessionRoute)) {
            return errorResponse(404, "no such route", Json{{"path", path}});
        }
        const std::string id     = m[1].str();
        const std::string action = m[2].str();
        if (action.empty() && request.method == "GET") {
            return json(200, stateJson(mStore.snapshot(id)));
        }
        if (action == "/edits" && request.method == "POST") {
            return applyEdit(id, request);
        }
        if (action == "/undo" && request.method == "POST") {
            return json(200, stateJson(mStore.undo(id)));
        }
        if (action == "/render" && request.method == "GET") {
            return render(id, request);
        }
        return errorResponse(405, "method not allowed");
    } catch (const SessionNotFound &e) {
        return errorResponse(404, e.what(), Json{{"id", e.id()}});
    } catch (const BadRequest &e) {
        return errorResponse(400, e.what());
    } catch (const ValidationError &e) {
        return errorResponse(422, e.what(), Json{{"violations", e.violations()}});
    } catch (const IndexError &e) {
        Json extra = Json::object();
        if (e.index() != std::size_t(-1)) {
            extra["index"] = e.index();
        }
        return errorResponse(409, e.what(), extra);
    } catch (const SessionConflict &e) {
        return errorResponse(409, e.what());
    } catch (const Error &e) {
        return errorResponse(422, e.what());
    } catch (const std::exception &e) {
        return errorResponse(500, e.what());
    }
}

// --- socket front end ------------------------------------------------------

struct HttpServer::Impl {
    explicit Impl(EditService &s) : service(s) {}
    EditService &service;
    httplib::Server server;
};

HttpServer::HttpServer(EditService &service) : mImpl(std::make_unique<Impl>(service)) {
    auto forward = [this](const httplib::Request &req, httplib::Response &res) {
        HttpRequest request{req.method, req.path, {}, req.body};
        for (const auto &[k, v] : req.params) {
            request.query.emplace(k, v);
        }
        const HttpResponse response = mImpl->service.handle(request);
        res.status                  = response.status;
        res.set_content(response.body, response.contentType);
    };
    mImpl->server.Get(R"(.*)", forward);
    mImpl->server.Post(R"(.*)", forward);
    mImpl->server.Put(R"(.*)", forward);
    mImpl->server.Delete(R"(.*)", forward);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string &host, int port) {
    if (port == 0) {
        const int bound = mImpl->server.bind_to_any_port(host);
        if (bound < 0) {
            throw Error("cannot bind " + host);
        }
        return bound;
    }
    if (!mImpl->server.bind_to_port(host, port)) {
        throw Error("cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void HttpServer::serve() { mImpl->server.listen_after_bind(); }

void HttpServer::stop() {
    if (mImpl) {
        mImpl->server.stop();
    }
}

std::pair<std::string, int> parseAddress(const std::string &address) {
    std::string host = "127.0.0.1";
    std::string port = address;
    if (const auto colon = address.rfind(':'); colon != std::string::npos) {
        if (colon > 0) {
            host = address.substr(0, colon);
        }
        port = address.substr(colon + 1);
    }
    int value = 0;
    char tail = 0;
    if (std::sscanf(port.c_str(), "%d%c", &value, &tail) != 1 || value < 0 || value > 65535) {
        throw Error("invalid address '" + address + "' (expected host:port)");
    }
    return {host, value};
}

} // namespace texton
