#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "eyas/error.hpp"
#include "eyas/json_io.hpp"

namespace httplib {
class Server;
}

namespace eyas::services {

struct Request {
    std::string method = "GET";
    std::string path = "/";
    /// Header names are stored lower-case.
    std::map<std::string, std::string> headers;
    std::map<std::string, std::string> query;
    std::string body;
    /// Filled by the router from "{name}" pattern segments.
    std::map<std::string, std::string> params;

    std::string header(const std::string& name, const std::string& fallback = "") const;
    std::string param(const std::string& name) const;
};

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::map<std::string, std::string> headers;

    bool ok() const { return status >= 200 && status < 300; }
    Json json() const;
};

Response json_response(int status, const Json& body);
Response error_response(int status, std::string_view code, std::string_view message);
/// Maps an ErrorCode to its HTTP status and the standard error body.
Response error_response(const Error& error);
int http_status(ErrorCode code) noexcept;
/// Rebuilds an Error from a non-2xx JSON error response.
[[noreturn]] void raise_for(const Response& response, std::string_view context);

Request json_request(std::string method, std::string path, const Json& body);

using Handler = std::function<Response(const Request&)>;

/// Method + path-pattern dispatch. Handler exceptions become JSON error
/// responses, so a dispatch never throws.
class Router {
public:
    void add(std::string method, std::string pattern, Handler handler);
    Response dispatch(Request request) const;

private:
    struct Route {
        std::string method;
        std::vector<std::string> segments;
        Handler handler;
    };
    std::vector<Route> routes_;
};

/// How one service reaches another, by logical name ("internal", "onh",
/// "macula", "vessels", "report").
class Transport {
public:
    virtual ~Transport() = default;
    virtual Response send(const std::string& service, const Request& request) = 0;
};

class InProcessTransport final : public Transport {
public:
    void bind(const std::string& service, const Router* router);
    Response send(const std::string& service, const Request& request) override;

private:
    std::mutex mutex_;
    std::map<std::string, const Router*> routers_;
};

class HttpTransport final : public Transport {
public:
    explicit HttpTransport(double timeout_seconds) : timeout_seconds_(timeout_seconds) {}
    void bind(const std::string& service, std::string host, int port);
    Response send(const std::string& service, const Request& request) override;

private:
    double timeout_seconds_;
    std::mutex mutex_;
    std::map<std::string, std::pair<std::string, int>> endpoints_;
};

/// Serves a router over HTTP/1.1 on a background thread.
class HttpServer {
public:
    HttpServer(const Router& router, std::size_t max_body_bytes = 256u << 20);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds (port 0 picks a free port) and starts serving; returns the port.
    int start(const std::string& host, int port);
    /// Blocks until stop() is called from another thread or a signal handler.
    void wait();
    void stop();
    int port() const { return port_; }

private:
    const Router& router_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace eyas::services
