#include "parkcast/workspace.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "parkcast/error.hpp"

namespace parkcast {

using nlohmann::json;

namespace {

constexpr const char* kIngestFile = "ingest.json";
constexpr const char* kBlocksFile = "blocks.geojson";
constexpr const char* kPoisFile = "pois.geojson";
constexpr const char* kOccupancyFile = "occupancy.csv";
constexpr const char* kPartitionFile = "partition.json";
constexpr const char* kRepresentationsFile = "representations.json";
constexpr std::size_t kMaxReportedRowErrors = 100;

fs::path stats_path(const fs::path& ws, Basis b) {
    return ws / "stats" / (std::string(to_string(b)) + ".csv");
}

void require(const fs::path& path, const char* stage) {
    if (!fs::exists(path)) {
        throw PreconditionError("workspace is missing " + path.filename().string() + "; run `parkcast " + stage +
                                "` first");
    }
}

json parse_json_file(const fs::path& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::string dump(const json& j) {
    return j.dump(1) + "\n";
}

std::string table_to_csv(const AmenityTable& t) {
    std::ostringstream out;
    write_amenity_stats(out, t);
    return out.str();
}

}  // namespace

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// ingest

IngestReport ingest_workspace(const fs::path& ws, const IngestOptions& options) {
    if (!(options.merge_distance > 0.0)) throw InputError("merge distance must be positive");
    auto parsed = parse_occupancy_csv(options.occupancy);
    auto geo = parse_geodata(options.blocks, options.pois);
    auto stats = load_amenity_stats(options.amenity_stats, options.basis);

    std::map<Basis, AmenityTable> tables;
    tables.emplace(options.basis, stats);
    const Basis other = options.basis == Basis::time_spent ? Basis::area : Basis::time_spent;
    if (!options.extra_stats.empty()) {
        tables.emplace(other, load_amenity_stats(options.extra_stats, other));
    } else if (other == Basis::area) {
        auto derived = area_stats_from_pois(geo.pois);
        if (!derived.entries.empty()) tables.emplace(Basis::area, std::move(derived));
    }

    std::set<std::string, std::less<>> known_blocks;
    for (const auto& b : geo.blocks) known_blocks.insert(b.block_id);
    std::vector<OccupancyRecord> records;
    IngestReport report;
    report.row_errors = parsed.errors;
    for (auto& r : parsed.records) {
        if (!known_blocks.contains(r.block_id)) {
            report.row_errors.push_back({0, "reading for unknown block '" + r.block_id + "'"});
            continue;
        }
        records.push_back(std::move(r));
    }

    auto index = match_amenities(geo.blocks, geo.pois, options.merge_distance);
    flag_unknown_amenities(index, stats);

    report.records = records.size();
    report.blocks = geo.blocks.size();
    report.monitored_blocks = static_cast<std::size_t>(
        std::count_if(geo.blocks.begin(), geo.blocks.end(), [](const Block& b) { return b.has_parking_data; }));
    report.pois = geo.pois.size();
    report.pois_with_amenity = index.pois_considered;
    report.pois_unmatched = index.pois_unmatched;
    report.occurrences = index.occurrence_count();
    report.unknown_amenities = index.unknown_amenities;
    for (const auto& [b, t] : tables) report.bases.push_back(b);

    json j;
    j["version"] = kWorkspaceVersion;
    j["basis"] = std::string(to_string(options.basis));
    j["merge_distance_m"] = options.merge_distance;
    json idx = json::object();
    for (const auto& [block, matches] : index.by_block) {
        json arr = json::array();
        for (const auto& m : matches) arr.push_back(json::array({m.poi_id, m.amenity}));
        idx[block] = arr;
    }
    j["index"] = idx;
    json errors = json::array();
    for (std::size_t i = 0; i < report.row_errors.size() && i < kMaxReportedRowErrors; ++i) {
        errors.push_back({{"line", report.row_errors[i].line}, {"message", report.row_errors[i].message}});
    }
    j["diagnostics"] = {{"records", report.records},
                        {"row_errors", report.row_errors.size()},
                        {"row_error_samples", errors},
                        {"blocks", report.blocks},
                        {"monitored_blocks", report.monitored_blocks},
                        {"pois", report.pois},
                        {"pois_with_amenity", report.pois_with_amenity},
                        {"pois_without_amenity", index.pois_without_amenity},
                        {"pois_unmatched", report.pois_unmatched},
                        {"occurrences", report.occurrences},
                        {"unknown_amenities", report.unknown_amenities}};

    fs::create_directories(ws);
    write_text_file(ws / kBlocksFile, blocks_to_geojson(geo.blocks));
    write_text_file(ws / kPoisFile, pois_to_geojson(geo.pois));
    {
        std::ostringstream out;
        write_occupancy_csv(out, records);
        write_text_file(ws / kOccupancyFile, out.str());
    }
    fs::remove_all(ws / "stats");
    for (const auto& [b, t] : tables) write_text_file(stats_path(ws, b), table_to_csv(t));
    write_text_file(ws / kIngestFile, dump(j));
    return report;
}

IngestManifest load_manifest(const fs::path& ws) {
    require(ws / kIngestFile, "ingest");
    const json j = parse_json_file(ws / kIngestFile);
    IngestManifest m;
    try {
        m.basis = parse_basis(j.at("basis").get<std::string>());
        m.merge_distance = j.at("merge_distance_m").get<double>();
        m.index.merge_distance_m = m.merge_distance;
        for (const auto& [block, arr] : j.at("index").items()) {
            auto& v = m.index.by_block[block];
            for (const auto& pair : arr) v.push_back({pair.at(0).get<std::string>(), pair.at(1).get<std::string>()});
        }
        const auto& d = j.at("diagnostics");
        m.index.pois_considered = d.at("pois_with_amenity").get<std::size_t>();
        m.index.pois_unmatched = d.at("pois_unmatched").get<std::size_t>();
        m.index.pois_without_amenity = d.at("pois_without_amenity").get<std::size_t>();
        m.index.unknown_amenities = d.at("unknown_amenities").get<std::map<std::string, std::size_t>>();
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed ingest.json: ") + e.what());
    }
    return m;
}

CityData load_city(const fs::path& ws) {
    require(ws / kIngestFile, "ingest");
    CityData city;
    city.blocks = parse_blocks_geojson(read_text_file(ws / kBlocksFile));
    city.pois = parse_pois_geojson(read_text_file(ws / kPoisFile));
    auto parsed = parse_occupancy_csv((ws / kOccupancyFile).string());
    if (!parsed.errors.empty()) throw InputError("workspace occupancy.csv has invalid rows");
    city.records = std::move(parsed.records);
    for (Basis b : {Basis::time_spent, Basis::area}) {
        if (fs::exists(stats_path(ws, b))) city.stats.emplace(b, load_amenity_stats(stats_path(ws, b).string(), b));
    }
    return city;
}

// ---------------------------------------------------------------------------
// cluster

json partition_to_json(const ClusterPartition& p) {
    json clusters = json::array();
    for (const auto* group : {&p.clusters_with, &p.clusters_without}) {
        for (const auto& c : *group) {
            clusters.push_back({{"cluster", c.ref().key()},
                                {"cluster_id", c.cluster_id},
                                {"group", std::string(to_string(c.group))},
                                {"block_ids", c.block_ids},
                                {"centroid", json::array({c.centroid.lat, c.centroid.lon})}});
        }
    }
    return {{"version", kWorkspaceVersion},
            {"k_with", p.k_with},
            {"k_without", p.k_without},
            {"ratio", p.ratio},
            {"seed", p.seed},
            {"clusters", clusters}};
}

ClusterPartition partition_from_json(const json& j) {
    ClusterPartition p;
    try {
        p.k_with = j.at("k_with").get<int>();
        p.k_without = j.at("k_without").get<int>();
        p.ratio = j.at("ratio").get<double>();
        p.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& c : j.at("clusters")) {
            Cluster cl;
            cl.cluster_id = c.at("cluster_id").get<int>();
            cl.group = parse_group(c.at("group").get<std::string>());
            cl.block_ids = c.at("block_ids").get<std::vector<std::string>>();
            cl.centroid = {c.at("centroid").at(0).get<double>(), c.at("centroid").at(1).get<double>()};
            (cl.group == Group::with_data ? p.clusters_with : p.clusters_without).push_back(std::move(cl));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed partition: ") + e.what());
    }
    return p;
}

ClusterPartition cluster_workspace(const fs::path& ws, int k_with, double ratio, std::uint64_t seed) {
    const auto city = load_city(ws);
    auto p = partition_city(city.blocks, k_with, ratio, seed);
    write_text_file(ws / kPartitionFile, dump(partition_to_json(p)));
    return p;
}

ClusterPartition load_partition(const fs::path& ws) {
    require(ws / kPartitionFile, "cluster");
    return partition_from_json(parse_json_file(ws / kPartitionFile));
}

// ---------------------------------------------------------------------------
// train

ModelIndex train_workspace(const fs::path& ws, const TrainOptions& options) {
    const auto city = load_city(ws);
    const auto partition = load_partition(ws);
    const auto grouped = records_by_cluster(partition, city.records);

    ModelIndex index;
    index.learner = options.learner;
    index.seed = options.seed;
    index.datapoints = options.datapoints;
    double price = 0.0, spots = 0.0;
    std::size_t n = 0;
    for (const auto& [key, recs] : grouped) {
        for (const auto& r : recs) {
            price += r.price_rate;
            spots += r.total_spots;
            ++n;
        }
    }
    if (n == 0) throw PreconditionError("no occupancy readings fall into monitored clusters");
    index.price_rate_mean = price / static_cast<double>(n);
    index.total_spots_mean = spots / static_cast<double>(n);

    fs::remove_all(ws / "training");
    fs::remove_all(ws / "models");
    json entries = json::array();
    for (const auto& c : partition.clusters_with) {
        const auto key = c.ref().key();
        const auto& recs = grouped.at(key);
        std::set<std::string, std::less<>> blocks(c.block_ids.begin(), c.block_ids.end());
        AggregationDiagnostics diag;
        const auto points = aggregate_cluster(recs, blocks, options.mode, &diag);
        std::ostringstream csv;
        write_training_csv(csv, points);
        write_text_file(ws / "training" / to_string(Group::with_data) / (std::to_string(c.cluster_id) + ".csv"),
                        csv.str());

        Dataset data = options.datapoints == Datapoints::aggregate ? Dataset::from_points(points)
                                                                   : Dataset::from_records(recs);
        data.source_cluster = key;
        if (data.size() < static_cast<std::size_t>(options.folds)) {
            throw PreconditionError("cluster '" + key + "' has too few rows (" + std::to_string(data.size()) +
                                    ") to train");
        }
        auto model = train(data, options.learner, options.seed, options.folds);
        write_text_file(ws / "models" / (key + ".model"), serialize_model(model));
        entries.push_back({{"cluster", key},
                           {"file", key + ".model"},
                           {"learner", std::string(to_string(model.learner))},
                           {"config", hyperparameters_to_json(model.config)},
                           {"cv_rmse", model.cv_rmse},
                           {"raw_records", recs.size()},
                           {"training_rows", data.size()},
                           {"capped_rates", diag.capped}});
        index.models.emplace(key, std::move(model));
    }
    json j = {{"version", kWorkspaceVersion},
              {"learner", std::string(to_string(options.learner))},
              {"seed", options.seed},
              {"datapoints", std::string(to_string(options.datapoints))},
              {"occupancy_mode", options.mode == OccupancyMode::rate_mean ? "rate_mean" : "count_mean"},
              {"input_averages", {{"price_rate", index.price_rate_mean}, {"total_spots", index.total_spots_mean}}},
              {"models", entries}};
    write_text_file(ws / "models" / "index.json", dump(j));
    return index;
}

ModelIndex load_models(const fs::path& ws) {
    require(ws / "models" / "index.json", "train");
    const json j = parse_json_file(ws / "models" / "index.json");
    ModelIndex index;
    try {
        index.learner = parse_learner(j.at("learner").get<std::string>());
        index.seed = j.at("seed").get<std::uint64_t>();
        index.datapoints = parse_datapoints(j.at("datapoints").get<std::string>());
        index.price_rate_mean = j.at("input_averages").at("price_rate").get<double>();
        index.total_spots_mean = j.at("input_averages").at("total_spots").get<double>();
        for (const auto& e : j.at("models")) {
            const auto key = e.at("cluster").get<std::string>();
            index.models.emplace(key, deserialize_model(read_text_file(ws / "models" / e.at("file").get<std::string>())));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed models/index.json: ") + e.what());
    }
    return index;
}

// ---------------------------------------------------------------------------
// similarity

fs::path similarity_path(const fs::path& ws, Metric metric, Basis basis, bool with_with) {
    return ws / "similarity" /
           (std::string(to_string(metric)) + "-" + std::string(to_string(basis)) + (with_with ? "-with" : "") + ".csv");
}

SimilarityReport similarity_workspace(const fs::path& ws, Metric metric, Basis basis) {
    const auto manifest = load_manifest(ws);
    const auto partition = load_partition(ws);
    if (!fs::exists(stats_path(ws, basis))) {
        throw PreconditionError("no amenity statistics for basis '" + std::string(to_string(basis)) +
                                "' in the workspace");
    }
    const auto stats = load_amenity_stats(stats_path(ws, basis).string(), basis);
    const auto reps = represent_partition(partition, manifest.index, stats);

    SimilarityReport report;
    SimilarityDiagnostics diag;
    report.with_without = similarity_matrix(metric, basis, reps.with_data, reps.without_data, &diag);
    report.with_with = similarity_matrix(metric, basis, reps.with_data, reps.with_data, &diag);
    report.empty_clusters = diag.empty_clusters;
    report.unknown_amenities = reps.diagnostics.unknown_amenities;

    // representations.json keeps one entry per basis.
    json all = json::object();
    const auto rep_path = ws / kRepresentationsFile;
    if (fs::exists(rep_path)) all = parse_json_file(rep_path);
    json clusters = json::object();
    for (const auto* group : {&reps.with_data, &reps.without_data}) {
        for (const auto& r : *group) {
            clusters[r.cluster] = {{"vector", r.vector.counts},
                                   {"amenities", reps.amenities.at(r.cluster)},
                                   {"mass", r.gaussian.mass()},
                                   {"heights", r.gaussian.heights}};
        }
    }
    all[std::string(to_string(basis))] = {
        {"support",
         {{"offset", reps.support.offset}, {"bin_count", reps.support.bin_count}, {"bin_width", reps.support.bin_width}}},
        {"clusters", clusters},
        {"unknown_amenities", report.unknown_amenities}};
    write_text_file(rep_path, dump(all));

    for (bool ww : {false, true}) {
        std::ostringstream out;
        write_similarity_csv(out, ww ? report.with_with : report.with_without);
        write_text_file(similarity_path(ws, metric, basis, ww), out.str());
    }
    return report;
}

SimilarityMatrix load_similarity(const fs::path& ws, Metric metric, Basis basis, bool with_with) {
    const auto path = similarity_path(ws, metric, basis, with_with);
    if (!fs::exists(path)) {
        throw NotFoundError("no " + std::string(to_string(metric)) + "/" + std::string(to_string(basis)) +
                            " similarity in the workspace; run `parkcast similarity` first");
    }
    std::istringstream in(read_text_file(path));
    return read_similarity_csv(in, metric, basis);
}

// ---------------------------------------------------------------------------
// estimate

ClusterRef resolve_target(const std::string& target) {
    if (!target.empty() && target.find_first_not_of("0123456789") == std::string::npos) {
        return ClusterRef::parse("without-" + target);
    }
    return ClusterRef::parse(target);
}

std::vector<EstimateTable> estimate_workspace(const fs::path& ws, const EstimateOptions& options) {
    const auto ref = resolve_target(options.target);
    const auto partition = load_partition(ws);
    if (!partition.find(ref)) throw NotFoundError("unknown cluster '" + ref.key() + "'");
    if (ref.group == Group::with_data) {
        throw PreconditionError("cluster '" + ref.key() + "' has parking data; estimates target unmonitored clusters");
    }
    const Basis basis = options.basis ? *options.basis : load_manifest(ws).basis;
    const auto models = load_models(ws);
    const auto sims = load_similarity(ws, options.metric, basis);
    const double price = options.fixed_inputs ? options.price_rate : models.price_rate_mean;
    const double spots = options.fixed_inputs ? options.total_spots : models.total_spots_mean;
    const auto inputs = build_unmonitored_input(options.date, options.hours, price, spots);

    std::vector<EstimateTable> out;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto ts = Timestamp{options.date} + std::chrono::hours{options.hours[i]};
        out.push_back(estimate_for_target(ref.key(), models.models, sims, inputs[i], ts));
    }
    return out;
}

void write_estimate_table(std::ostream& out, const EstimateTable& table) {
    out << "# target " << table.target_cluster << " at " << format_timestamp_iso(table.timestamp) << " metric "
        << to_string(table.metric) << '\n';
    out << "source_id,similarity,lo%,hi%,eii_lo%,eii_hi%\n";
    for (const auto& row : table.rows) {
        const auto& iv = row.interval;
        out << iv.source_cluster << ',' << detail::format_fixed(iv.similarity, 4) << ',' << to_percent(iv.lo) << ','
            << to_percent(iv.hi) << ',';
        if (row.intersection) {
            out << to_percent(row.intersection->lo) << ',' << to_percent(row.intersection->hi);
        } else {
            out << "empty,empty";
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// evaluate

namespace {

std::string merge_label(double m) {
    return detail::format_number(m);
}

std::string corr(const std::optional<double>& v) {
    return v ? detail::format_fixed(*v, 4) : "";
}

}  // namespace

std::vector<ExperimentResult> evaluate_workspace(const fs::path& ws, const EvaluateOptions& options) {
    const auto city = load_city(ws);
    std::vector<ExperimentConfig> configs;
    if (options.grid) {
        for (int k : options.grid_k) {
            for (double m : options.grid_merge) {
                auto c = options.experiment;
                c.k = k;
                c.merge_distance = m;
                configs.push_back(c);
            }
        }
    } else {
        configs.push_back(options.experiment);
    }

    std::vector<ExperimentResult> results;
    for (const auto& c : configs) results.push_back(run_experiment(city, c));

    const fs::path dir = ws / "evaluation";
    fs::remove_all(dir);
    std::ostringstream best, correlations, errors, total;
    best << "clusters,merge_distance";
    for (Learner l : options.experiment.learners) best << ',' << to_string(l);
    best << '\n';
    correlations << "clusters,merge_distance,basis,datapoints_source,datapoints_target,cosine,rank_cosine,emd,"
                    "rank_emd,excluded\n";
    errors << "clusters,merge_distance,datapoints_source,datapoints_target,learner,test_error\n";
    total << "clusters,merge_distance,model,test_error_average\n";
    for (const auto& r : results) {
        const auto& c = r.config;
        const auto m = merge_label(c.merge_distance);
        best << c.k << ',' << m;
        for (Learner l : c.learners) best << ',' << detail::format_fixed(100.0 * r.best_fraction.at(l), 1);
        best << '\n';
        correlations << c.k << ',' << m << ',' << to_string(c.basis) << ',' << to_string(c.transfer.train_on) << ','
                     << to_string(c.transfer.test_on) << ',' << corr(r.cosine.mean_pearson) << ','
                     << corr(r.cosine.mean_spearman) << ',' << corr(r.emd.mean_pearson) << ','
                     << corr(r.emd.mean_spearman) << ','
                     << (r.cosine.excluded_pearson + r.cosine.excluded_spearman + r.emd.excluded_pearson +
                         r.emd.excluded_spearman)
                     << '\n';
        for (Learner l : c.learners) {
            errors << c.k << ',' << m << ',' << to_string(c.transfer.train_on) << ',' << to_string(c.transfer.test_on)
                   << ',' << to_string(l) << ',' << detail::format_fixed(r.mean_error.at(l), 2) << '\n';
            std::ostringstream mat;
            const auto& e = r.errors.at(l);
            mat << "source";
            for (const auto& t : e.clusters) mat << ',' << t;
            mat << '\n';
            for (const auto& s : e.clusters) {
                mat << s;
                for (const auto& t : e.clusters) mat << ',' << (s == t ? "" : detail::format_fixed(e.at(s, t), 4));
                mat << '\n';
            }
            write_text_file(dir / "transfer" / ("k" + std::to_string(c.k) + "-m" + m + "-" + std::string(to_string(l)) +
                                                ".csv"),
                            mat.str());
        }
        if (r.total) {
            const std::string name(to_string(c.learners.back()));
            total << c.k << ',' << m << ',' << name << ',' << detail::format_fixed(r.total->mean_base, 2) << '\n';
            total << c.k << ',' << m << ',' << name << " total," << detail::format_fixed(r.total->mean_extended, 2)
                  << '\n';
        }
    }
    write_text_file(dir / "best_models.csv", best.str());
    write_text_file(dir / "correlations.csv", correlations.str());
    write_text_file(dir / "test_errors.csv", errors.str());
    if (options.experiment.total_models) write_text_file(dir / "total_models.csv", total.str());
    return results;
}

}  // namespace parkcast
