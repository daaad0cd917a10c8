#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "parkcast/error.hpp"
#include "parkcast/evaluate.hpp"
#include "parkcast/serve.hpp"
#include "parkcast/synth.hpp"
#include "parkcast/workspace.hpp"

namespace py = pybind11;
using namespace parkcast;

namespace {

std::chrono::sys_days date_arg(const std::string& s) {
    auto d = parse_date(s);
    if (!d) throw InputError("invalid date '" + s + "' (expected YYYY-MM-DD)");
    return *d;
}

py::object optional_float(const std::optional<double>& v) {
    return v ? py::cast(*v) : py::none();
}

py::dict matrix_dict(const SimilarityMatrix& m) {
    py::list values;
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        py::list row;
        for (std::size_t c = 0; c < m.cols.size(); ++c) row.append(m.at(r, c));
        values.append(row);
    }
    py::dict d;
    d["metric"] = std::string(to_string(m.metric));
    d["basis"] = std::string(to_string(m.basis));
    d["rows"] = m.rows;
    d["cols"] = m.cols;
    d["values"] = values;
    return d;
}

py::dict table_dict(const EstimateTable& t) {
    py::list rows;
    for (const auto& r : t.rows) {
        py::dict row;
        row["source_id"] = r.interval.source_cluster;
        row["similarity"] = r.interval.similarity;
        row["point"] = r.interval.point;
        row["lo"] = r.interval.lo;
        row["hi"] = r.interval.hi;
        row["eii"] = r.intersection ? py::make_tuple(r.intersection->lo, r.intersection->hi) : py::object(py::none());
        rows.append(row);
    }
    py::dict d;
    d["cluster_id"] = t.target_cluster;
    d["timestamp"] = format_timestamp_iso(t.timestamp);
    d["metric"] = std::string(to_string(t.metric));
    d["rows"] = rows;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Occupancy estimation for city areas without parking sensors.";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InputError>(m, "InputError", error);
    py::register_exception<PreconditionError>(m, "PreconditionError", error);
    py::register_exception<NotFoundError>(m, "NotFoundError", error);

    m.def(
        "synth",
        [](const std::string& out, int blocks, int archetypes, int days, double noise, std::uint64_t seed) {
            SyntheticCityConfig c;
            c.n_blocks = blocks;
            c.n_archetypes = archetypes;
            c.days = days;
            c.noise = noise;
            c.seed = seed;
            auto files = write_synthetic_city(generate_synthetic_city(c), out);
            py::dict d;
            d["blocks"] = files.blocks;
            d["pois"] = files.pois;
            d["occupancy"] = files.occupancy;
            d["amenity_stats"] = files.amenity_stats;
            return d;
        },
        py::arg("out"), py::arg("blocks") = 200, py::arg("archetypes") = 3, py::arg("days") = 30,
        py::arg("noise") = 0.05, py::arg("seed") = 7,
        "Write a synthetic city (blocks, POIs, occupancy, amenity stats) to `out`.");

    m.def(
        "ingest",
        [](const std::string& ws, const std::string& occupancy, const std::string& blocks, const std::string& pois,
           const std::string& amenity_stats, const std::string& basis, double merge_distance) {
            IngestOptions o;
            o.occupancy = occupancy;
            o.blocks = blocks;
            o.pois = pois;
            o.amenity_stats = amenity_stats;
            o.basis = parse_basis(basis);
            o.merge_distance = merge_distance;
            auto r = ingest_workspace(ws, o);
            py::dict d;
            d["records"] = r.records;
            d["row_errors"] = r.row_errors.size();
            d["blocks"] = r.blocks;
            d["monitored_blocks"] = r.monitored_blocks;
            d["pois"] = r.pois;
            d["occurrences"] = r.occurrences;
            d["unknown_amenities"] = r.unknown_amenities;
            return d;
        },
        py::arg("workspace"), py::arg("occupancy"), py::arg("blocks"), py::arg("pois"), py::arg("amenity_stats"),
        py::arg("basis") = "time_spent", py::arg("merge_distance") = 100.0);

    m.def(
        "cluster",
        [](const std::string& ws, int k, double ratio, std::uint64_t seed) {
            auto p = cluster_workspace(ws, k, ratio, seed);
            std::map<std::string, std::vector<std::string>> out;
            for (const auto* g : {&p.clusters_with, &p.clusters_without}) {
                for (const auto& c : *g) out[c.ref().key()] = c.block_ids;
            }
            return out;
        },
        py::arg("workspace"), py::arg("k") = 8, py::arg("ratio") = kDefaultClusterRatio, py::arg("seed") = 42,
        "Cluster blocks; returns block ids by cluster key.");

    m.def(
        "train",
        [](const std::string& ws, const std::string& learner, std::uint64_t seed, const std::string& datapoints,
           int folds) {
            TrainOptions o;
            o.learner = parse_learner(learner);
            o.seed = seed;
            o.datapoints = parse_datapoints(datapoints);
            o.folds = folds;
            std::map<std::string, double> cv;
            for (const auto& [key, model] : train_workspace(ws, o).models) cv[key] = model.cv_rmse;
            return cv;
        },
        py::arg("workspace"), py::arg("learner") = "gbt", py::arg("seed") = 42, py::arg("datapoints") = "aggregate",
        py::arg("folds") = kDefaultFolds, "Train one model per monitored cluster; returns cv RMSE by cluster key.");

    m.def(
        "similarity",
        [](const std::string& ws, const std::string& metric, const std::string& basis) {
            return matrix_dict(similarity_workspace(ws, parse_metric(metric), parse_basis(basis)).with_without);
        },
        py::arg("workspace"), py::arg("metric") = "cosine", py::arg("basis") = "time_spent");

    m.def(
        "estimate",
        [](const std::string& ws, const std::string& target, const std::string& date, const std::string& metric,
           std::vector<int> hours) {
            EstimateOptions o;
            o.target = target;
            o.date = date_arg(date);
            o.metric = parse_metric(metric);
            if (!hours.empty()) o.hours = std::move(hours);
            py::list out;
            for (const auto& t : estimate_workspace(ws, o)) out.append(table_dict(t));
            return out;
        },
        py::arg("workspace"), py::arg("target"), py::arg("date") = "2017-11-04", py::arg("metric") = "cosine",
        py::arg("hours") = std::vector<int>{});

    m.def(
        "request",
        [](const std::string& ws, const std::string& path, const std::map<std::string, std::string>& query) {
            Service service(ws);
            auto r = service.handle(path, query);
            return py::make_tuple(r.status, r.body);
        },
        py::arg("workspace"), py::arg("path"), py::arg("query") = std::map<std::string, std::string>{},
        "Answer one HTTP API path against a workspace; returns (status, body).");

    m.def(
        "interval",
        [](const std::string& metric, double point, double similarity) {
            auto iv = make_interval(parse_metric(metric), point, similarity);
            return py::make_tuple(iv.lo, iv.hi);
        },
        py::arg("metric"), py::arg("point"), py::arg("similarity"));

    m.def("gaussian_w2", &gaussian_w2, py::arg("m1"), py::arg("s1"), py::arg("m2"), py::arg("s2"));
    m.def(
        "pearson",
        [](const std::vector<double>& x, const std::vector<double>& y) { return optional_float(pearson(x, y)); },
        py::arg("x"), py::arg("y"));
    m.def(
        "spearman",
        [](const std::vector<double>& x, const std::vector<double>& y) { return optional_float(spearman(x, y)); },
        py::arg("x"), py::arg("y"));
}
