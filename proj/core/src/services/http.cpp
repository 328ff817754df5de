#include "eyas/services/http.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <sstream>

namespace eyas::services {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '/'))
        if (!part.empty()) out.push_back(part);
    return out;
}

ErrorCode code_from_string(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(ErrorCode::internal); ++i) {
        const auto c = static_cast<ErrorCode>(i);
        if (to_string(c) == s) return c;
    }
    return ErrorCode::internal;
}

}  // namespace

std::string Request::header(const std::string& name, const std::string& fallback) const {
    auto it = headers.find(lower(name));
    return it == headers.end() ? fallback : it->second;
}

std::string Request::param(const std::string& name) const {
    auto it = params.find(name);
    return it == params.end() ? std::string() : it->second;
}

Json Response::json() const { return parse_json(body); }

Response json_response(int status, const Json& body) {
    Response r;
    r.status = status;
    r.body = body.dump();
    return r;
}

Response error_response(int status, std::string_view code, std::string_view message) {
    return json_response(status, Json{{"error", {{"code", code}, {"message", message}}}});
}

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument:
        case ErrorCode::bounds:
        case ErrorCode::dimension_mismatch:
        case ErrorCode::unsupported_format:
        case ErrorCode::decode:
        case ErrorCode::format:
        case ErrorCode::unknown_label:
        case ErrorCode::length_mismatch:
        case ErrorCode::missing_labels: return 400;
        case ErrorCode::not_found: return 404;
        case ErrorCode::pending:
        case ErrorCode::conflict:
        case ErrorCode::state: return 409;
        case ErrorCode::payload_too_large: return 413;
        case ErrorCode::degenerate_template:
        case ErrorCode::out_of_view:
        case ErrorCode::segmentation_empty:
        case ErrorCode::degenerate_mask:
        case ErrorCode::classification_failed:
        case ErrorCode::insufficient_vessels:
        case ErrorCode::roi_too_small:
        case ErrorCode::undefined_metric:
        case ErrorCode::empty_report: return 422;
        case ErrorCode::backend_failure: return 502;
        case ErrorCode::timeout: return 504;
        case ErrorCode::io:
        case ErrorCode::internal: return 500;
    }
    return 500;
}

Response error_response(const Error& error) {
    return error_response(http_status(error.code()), to_string(error.code()), error.what());
}

void raise_for(const Response& response, std::string_view context) {
    std::string code = "internal";
    std::string message = "status " + std::to_string(response.status);
    try {
        const Json j = parse_json(response.body);
        code = j.at("error").at("code").get<std::string>();
        message = j.at("error").at("message").get<std::string>();
    } catch (...) {
    }
    ErrorCode ec = code_from_string(code);
    if (response.status == 503) ec = ErrorCode::backend_failure;
    fail(ec, std::string(context) + ": " + message);
}

Request json_request(std::string method, std::string path, const Json& body) {
    Request r;
    r.method = std::move(method);
    r.path = std::move(path);
    r.headers["content-type"] = "application/json";
    r.body = body.dump();
    return r;
}

void Router::add(std::string method, std::string pattern, Handler handler) {
    routes_.push_back({std::move(method), split_path(pattern), std::move(handler)});
}

Response Router::dispatch(Request request) const {
    const auto parts = split_path(request.path);
    bool path_matched = false;
    for (const auto& route : routes_) {
        if (route.segments.size() != parts.size()) continue;
        std::map<std::string, std::string> params;
        bool match = true;
        for (std::size_t i = 0; i < parts.size() && match; ++i) {
            const auto& seg = route.segments[i];
            if (seg.size() > 2 && seg.front() == '{' && seg.back() == '}') {
                params[seg.substr(1, seg.size() - 2)] = parts[i];
            } else {
                match = seg == parts[i];
            }
        }
        if (!match) continue;
        path_matched = true;
        if (route.method != request.method) continue;
        request.params = std::move(params);
        try {
            return route.handler(request);
        } catch (const Error& e) {
            return error_response(e);
        } catch (const nlohmann::json::exception& e) {
            return error_response(400, "format", e.what());
        } catch (const std::exception& e) {
            return error_response(500, "internal", e.what());
        }
    }
    if (path_matched) return error_response(405, "method_not_allowed", request.method + " not allowed on " + request.path);
    return error_response(404, "not_found", "no route for " + request.path);
}

void InProcessTransport::bind(const std::string& service, const Router* router) {
    std::lock_guard lock(mutex_);
    routers_[service] = router;
}

Response InProcessTransport::send(const std::string& service, const Request& request) {
    const Router* router = nullptr;
    {
        std::lock_guard lock(mutex_);
        auto it = routers_.find(service);
        if (it != routers_.end()) router = it->second;
    }
    if (router == nullptr) return error_response(503, "backend_failure", "service " + service + " is not bound");
    return router->dispatch(request);
}

void HttpTransport::bind(const std::string& service, std::string host, int port) {
    std::lock_guard lock(mutex_);
    endpoints_[service] = {std::move(host), port};
}

Response HttpTransport::send(const std::string& service, const Request& request) {
    std::pair<std::string, int> ep;
    {
        std::lock_guard lock(mutex_);
        auto it = endpoints_.find(service);
        if (it == endpoints_.end()) return error_response(503, "backend_failure", "unknown service " + service);
        ep = it->second;
    }
    httplib::Client client(ep.first, ep.second);
    const auto secs = static_cast<time_t>(timeout_seconds_);
    const auto usecs = static_cast<time_t>((timeout_seconds_ - double(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Request req;
    req.method = request.method;
    std::string path = request.path;
    if (!request.query.empty()) {
        path += '?';
        bool first = true;
        for (const auto& [k, v] : request.query) {
            if (!first) path += '&';
            first = false;
            path += httplib::detail::encode_query_param(k) + "=" + httplib::detail::encode_query_param(v);
        }
    }
    req.path = path;
    for (const auto& [k, v] : request.headers) req.set_header(k, v);
    req.body = request.body;
    auto res = client.send(req);
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::Read || err == httplib::Error::Write) {
            return error_response(504, "timeout", service + ": " + httplib::to_string(err));
        }
        return error_response(503, "backend_failure", service + " unreachable: " + httplib::to_string(err));
    }
    Response out;
    out.status = res->status;
    out.body = res->body;
    out.content_type = res->get_header_value("Content-Type");
    for (const auto& [k, v] : res->headers) out.headers[lower(k)] = v;
    return out;
}

HttpServer::HttpServer(const Router& router, std::size_t max_body_bytes)
    : router_(router), server_(std::make_unique<httplib::Server>()) {
    server_->set_payload_max_length(max_body_bytes);
    auto handle = [this](const httplib::Request& hreq, httplib::Response& hres) {
        Request req;
        req.method = hreq.method;
        req.path = hreq.path;
        for (const auto& [k, v] : hreq.headers) req.headers[lower(k)] = v;
        for (const auto& [k, v] : hreq.params) req.query[k] = v;
        req.body = hreq.body;
        const Response res = router_.dispatch(std::move(req));
        hres.status = res.status;
        for (const auto& [k, v] : res.headers) hres.set_header(k, v);
        hres.set_content(res.body, res.content_type);
    };
    server_->Get(".*", handle);
    server_->Post(".*", handle);
    server_->Put(".*", handle);
    server_->Delete(".*", handle);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
    } else {
        port_ = server_->bind_to_port(host, port) ? port : -1;
    }
    if (port_ <= 0) fail(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    return port_;
}

void HttpServer::wait() {
    if (thread_.joinable()) thread_.join();
}

void HttpServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace eyas::services
