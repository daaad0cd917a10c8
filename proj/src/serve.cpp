#include "parkcast/serve.hpp"

#include <cmath>
#include <set>

#include <httplib.h>

#include "parkcast/error.hpp"
#include "parkcast/geo.hpp"

namespace parkcast {

using nlohmann::json;

namespace {

HttpResponse error_response(int status, const std::string& message) {
    return {status, to_body({{"error", message}, {"status", status}})};
}

double round4(double v) {
    return std::round(v * 1e4) / 1e4;
}

json ring_geometry(const std::vector<LatLon>& points) {
    std::vector<LatLon> distinct;
    std::set<std::pair<double, double>> seen;
    for (const auto& p : points) {
        if (seen.insert({p.lat, p.lon}).second) distinct.push_back(p);
    }
    const auto hull = distinct.size() >= 3 ? convex_hull(distinct) : std::vector<LatLon>{};
    if (hull.size() < 3) {
        json coords = json::array();
        for (const auto& p : distinct) coords.push_back(json::array({p.lon, p.lat}));
        return {{"type", "MultiPoint"}, {"coordinates", coords}};
    }
    json ring = json::array();
    for (const auto& p : hull) ring.push_back(json::array({p.lon, p.lat}));
    ring.push_back(ring.front());
    return {{"type", "Polygon"}, {"coordinates", json::array({ring})}};
}

}  // namespace

std::string to_body(const json& j) {
    return j.dump() + "\n";
}

Service::Service(std::filesystem::path workspace, ServeOptions options)
    : root_(std::move(workspace)), options_(std::move(options)) {
    auto need = [&](const fs::path& rel) {
        if (!fs::exists(root_ / rel)) missing_.push_back(rel.generic_string());
    };
    need("ingest.json");
    need("blocks.geojson");
    need("partition.json");
    need("models/index.json");
    need("representations.json");
    if (!missing_.empty()) return;

    basis_ = options_.basis ? *options_.basis : load_manifest(root_).basis;
    partition_ = load_partition(root_);
    blocks_ = parse_blocks_geojson(read_text_file(root_ / "blocks.geojson"));
    representations_ = json::parse(read_text_file(root_ / "representations.json"));
    model_index_ = json::parse(read_text_file(root_ / "models" / "index.json"));
    models_ = load_models(root_);

    for (Metric m : {Metric::cosine, Metric::emd}) {
        for (Basis b : {Basis::time_spent, Basis::area}) {
            if (!fs::exists(similarity_path(root_, m, b))) continue;
            auto mat = load_similarity(root_, m, b);
            json values = json::array();
            for (std::size_t r = 0; r < mat.rows.size(); ++r) {
                json row = json::array();
                for (std::size_t c = 0; c < mat.cols.size(); ++c) row.push_back(mat.at(r, c));
                values.push_back(row);
            }
            similarity_json_[{m, b}] = {{"metric", std::string(to_string(m))},
                                        {"basis", std::string(to_string(b))},
                                        {"rows", mat.rows},
                                        {"cols", mat.cols},
                                        {"values", values}};
            similarity_.emplace(std::make_pair(m, b), std::move(mat));
        }
    }
    if (!similarity_.contains({Metric::cosine, basis_}) && !similarity_.contains({Metric::emd, basis_})) {
        missing_.push_back("similarity/<metric>-" + std::string(to_string(basis_)) + ".csv");
        return;
    }

    // Cluster features.
    std::map<std::string, LatLon, std::less<>> centroid;
    for (const auto& b : blocks_) centroid.emplace(b.block_id, b.centroid);
    const std::string basis_key(to_string(basis_));
    json features = json::array();
    for (const auto* group : {&partition_.clusters_with, &partition_.clusters_without}) {
        for (const auto& c : *group) {
            std::vector<LatLon> pts;
            for (const auto& id : c.block_ids) {
                auto it = centroid.find(id);
                if (it != centroid.end()) pts.push_back(it->second);
            }
            json props = {{"cluster_id", c.ref().key()},
                          {"group", std::string(to_string(c.group))},
                          {"block_count", c.block_ids.size()}};
            const auto key = c.ref().key();
            if (representations_.contains(basis_key) && representations_[basis_key]["clusters"].contains(key)) {
                props["category_counts"] = representations_[basis_key]["clusters"][key]["vector"];
            } else {
                props["category_counts"] = nullptr;
            }
            features.push_back({{"type", "Feature"}, {"geometry", ring_geometry(pts)}, {"properties", props}});
        }
    }
    clusters_body_ = to_body({{"type", "FeatureCollection"}, {"features", features}});

    // Estimates for the configured time grid.
    for (const auto& c : partition_.clusters_without) {
        for (Metric m : {Metric::cosine, Metric::emd}) {
            if (!similarity_.contains({m, basis_})) continue;
            for (int h : options_.hours) {
                const auto ts = Timestamp{options_.date} + std::chrono::hours{h};
                precomputed_[{c.ref().key(), m, format_timestamp_iso(ts)}] =
                    to_body(estimate_json(compute_estimate(c.ref(), m, ts)));
            }
        }
    }
}

std::vector<std::string> Service::configured_times() const {
    std::vector<std::string> out;
    for (int h : options_.hours) out.push_back(format_timestamp_iso(Timestamp{options_.date} + std::chrono::hours{h}));
    return out;
}

EstimateTable Service::compute_estimate(const ClusterRef& target, Metric metric, Timestamp ts) const {
    const double price = options_.fixed_inputs ? UnmonitoredDefaults::kPriceRate : models_.price_rate_mean;
    const double spots = options_.fixed_inputs ? UnmonitoredDefaults::kTotalSpots : models_.total_spots_mean;
    const auto features = extract_features(ts, price, spots);
    return estimate_for_target(target.key(), models_.models, similarity_.at({metric, basis_}), features, ts);
}

json Service::estimate_json(const EstimateTable& t) const {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json row = {{"source_id", r.interval.source_cluster},
                    {"similarity", round4(r.interval.similarity)},
                    {"point", to_percent(r.interval.point)},
                    {"lo", to_percent(r.interval.lo)},
                    {"hi", to_percent(r.interval.hi)}};
        if (r.intersection) {
            row["eii_lo"] = to_percent(r.intersection->lo);
            row["eii_hi"] = to_percent(r.intersection->hi);
        } else {
            row["eii_lo"] = nullptr;
            row["eii_hi"] = nullptr;
        }
        rows.push_back(row);
    }
    return {{"cluster_id", t.target_cluster},
            {"timestamp", format_timestamp_iso(t.timestamp)},
            {"metric", std::string(to_string(t.metric))},
            {"basis", std::string(to_string(basis_))},
            {"rows", rows}};
}

HttpResponse Service::handle(const std::string& path, const std::map<std::string, std::string>& query) const {
    try {
        if (path == "/api/health") return health();
        if (!missing_.empty()) {
            std::string list;
            for (const auto& m : missing_) list += (list.empty() ? "" : ", ") + m;
            return error_response(409, "workspace incomplete: missing " + list);
        }
        if (path == "/api/clusters") return clusters();
        if (path == "/api/similarity") return similarity(query);
        if (path == "/api/models") return models();
        const std::string prefix = "/api/clusters/";
        const std::string suffix = "/estimates";
        if (path.starts_with(prefix) && path.ends_with(suffix) && path.size() > prefix.size() + suffix.size()) {
            return estimates(path.substr(prefix.size(), path.size() - prefix.size() - suffix.size()), query);
        }
        return error_response(404, "no such endpoint: " + path);
    } catch (const NotFoundError& e) {
        return error_response(404, e.what());
    } catch (const InputError& e) {
        return error_response(400, e.what());
    } catch (const PreconditionError& e) {
        return error_response(400, e.what());
    }
}

HttpResponse Service::health() const {
    json j = {{"status", missing_.empty() ? "ok" : "incomplete"},
              {"version", kWorkspaceVersion},
              {"missing", missing_},
              {"times", configured_times()}};
    if (missing_.empty()) {
        j["basis"] = std::string(to_string(basis_));
        j["clusters_with"] = partition_.clusters_with.size();
        j["clusters_without"] = partition_.clusters_without.size();
    }
    return {200, to_body(j)};
}

HttpResponse Service::clusters() const {
    return {200, clusters_body_};
}

HttpResponse Service::models() const {
    return {200, to_body(model_index_)};
}

HttpResponse Service::similarity(const std::map<std::string, std::string>& query) const {
    auto get = [&](const char* key, const std::string& fallback) {
        auto it = query.find(key);
        return it == query.end() ? fallback : it->second;
    };
    Metric metric;
    Basis basis;
    try {
        metric = parse_metric(get("metric", "cosine"));
        basis = parse_basis(get("basis", std::string(to_string(basis_))));
    } catch (const InputError& e) {
        return error_response(404, e.what());
    }
    auto it = similarity_json_.find({metric, basis});
    if (it == similarity_json_.end()) {
        return error_response(404, "no " + std::string(to_string(metric)) + "/" + std::string(to_string(basis)) +
                                       " similarity in the workspace");
    }
    return {200, to_body(it->second)};
}

HttpResponse Service::estimates(const std::string& id, const std::map<std::string, std::string>& query) const {
    ClusterRef ref;
    try {
        ref = resolve_target(id);
    } catch (const InputError&) {
        return error_response(404, "unknown cluster '" + id + "'");
    }
    if (!partition_.find(ref)) return error_response(404, "unknown cluster '" + id + "'");
    if (ref.group == Group::with_data) {
        return error_response(400, "cluster '" + ref.key() + "' has parking data; estimates target unmonitored clusters");
    }
    Metric metric = Metric::cosine;
    if (auto it = query.find("metric"); it != query.end()) metric = parse_metric(it->second);
    if (!similarity_.contains({metric, basis_})) {
        return error_response(404, "no " + std::string(to_string(metric)) + " similarity in the workspace");
    }
    Timestamp ts = Timestamp{options_.date} + std::chrono::hours{options_.hours.front()};
    if (auto it = query.find("t"); it != query.end()) {
        auto parsed = parse_timestamp(it->second);
        if (!parsed) return error_response(400, "invalid timestamp '" + it->second + "'");
        ts = *parsed;
    }
    auto pre = precomputed_.find({ref.key(), metric, format_timestamp_iso(ts)});
    if (pre != precomputed_.end()) return {200, pre->second};
    return {200, to_body(estimate_json(compute_estimate(ref, metric, ts)))};
}

struct HttpServer::Impl {
    httplib::Server server;
};

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>()) {
    auto& server = impl_->server;
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get(R"(/.*)", [&service](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params) query.emplace(k, v);
        auto r = service.handle(req.path, query);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen() {
    if (!impl_->server.listen_after_bind()) throw Error("HTTP server stopped with an error");
}

void HttpServer::stop() {
    impl_->server.stop();
}

}  // namespace parkcast
