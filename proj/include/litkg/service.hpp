#pragma once

#include <litkg/error.hpp>
#include <litkg/snapshot.hpp>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace litkg {

struct ApiRequest {
    std::string method = "GET";
    std::string path;  // decoded, without the query string
    std::map<std::string, std::string> query;
    std::string body;

    /// Splits "path?a=1&b=2" and percent-decodes both parts.
    static ApiRequest get(const std::string& target);
    static ApiRequest post(const std::string& target, std::string body);
};

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Starts an update in the background. Returns the id of the snapshot being
/// built, or nullopt when a build is already running.
using UpdateTrigger = std::function<std::optional<std::uint64_t>()>;

/// JSON API over whatever snapshot the holder currently points at. Every
/// request reads exactly one snapshot.
class ApiService {
public:
    explicit ApiService(const SnapshotHolder& holder, UpdateTrigger trigger = nullptr);

    ApiResponse handle(const ApiRequest& request) const;

private:
    const SnapshotHolder& holder_;
    UpdateTrigger trigger_;
};

/// Error body: {"error": {"code": ..., "message": ...}} with the status
/// matching the code.
ApiResponse error_response(ErrorCode code, const std::string& message);
int http_status(ErrorCode code);

/// cpp-httplib front end for ApiService; optional static directory mounted
/// at "/" for the browser client.
class HttpServer {
public:
    HttpServer(const ApiService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~HttpServer();

    /// Binds; port 0 picks a free one. Throws Error(io) on failure.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void run();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace litkg
