#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <tuple>
#include <string>
#include <vector>

#include <json.hpp>

#include "parkcast/workspace.hpp"

namespace parkcast {

struct ServeOptions {
    std::chrono::sys_days date = std::chrono::sys_days{std::chrono::year{2017} / 11 / 4};
    std::vector<int> hours = default_hours();
    /// Basis used for estimates; defaults to the ingest basis.
    std::optional<Basis> basis;
    bool fixed_inputs = false;
};

struct HttpResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Read-only view of a workspace answering the HTTP API. Everything is
/// loaded once in the constructor; `handle` is safe to call concurrently.
class Service {
public:
    explicit Service(std::filesystem::path workspace, ServeOptions options = {});

    HttpResponse handle(const std::string& path, const std::map<std::string, std::string>& query) const;

    bool complete() const { return missing_.empty(); }
    const std::vector<std::string>& missing() const { return missing_; }
    std::vector<std::string> configured_times() const;

private:
    HttpResponse clusters() const;
    HttpResponse estimates(const std::string& id, const std::map<std::string, std::string>& query) const;
    HttpResponse similarity(const std::map<std::string, std::string>& query) const;
    HttpResponse models() const;
    HttpResponse health() const;
    nlohmann::json estimate_json(const EstimateTable& t) const;
    EstimateTable compute_estimate(const ClusterRef& target, Metric metric, Timestamp ts) const;

    std::filesystem::path root_;
    ServeOptions options_;
    std::vector<std::string> missing_;
    Basis basis_ = Basis::time_spent;
    ClusterPartition partition_;
    std::vector<Block> blocks_;
    nlohmann::json representations_;
    nlohmann::json model_index_;
    ModelIndex models_;
    std::map<std::pair<Metric, Basis>, SimilarityMatrix> similarity_;
    std::map<std::pair<Metric, Basis>, nlohmann::json> similarity_json_;
    std::string clusters_body_;
    /// (cluster key, metric, ISO minute) -> serialized table
    std::map<std::tuple<std::string, Metric, std::string>, std::string> precomputed_;
};

/// Serializes with sorted keys and a trailing newline.
std::string to_body(const nlohmann::json& j);

/// HTTP front end for a Service, with CORS open to any origin.
class HttpServer {
public:
    explicit HttpServer(const Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to `host:port`; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until `stop` is called.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace parkcast
