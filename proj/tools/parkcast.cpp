#include <csignal>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parkcast/error.hpp"
#include "parkcast/serve.hpp"
#include "parkcast/synth.hpp"
#include "parkcast/workspace.hpp"

using namespace parkcast;

namespace {

std::chrono::sys_days date_arg(const std::string& s) {
    auto d = parse_date(s);
    if (!d) throw InputError("invalid date '" + s + "' (expected YYYY-MM-DD)");
    return *d;
}

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string corr(const std::optional<double>& v) {
    return v ? fmt(*v, 2) : "n/a";
}

HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parkcast: occupancy estimation for city areas without parking sensors"};
    app.require_subcommand(1);
    std::string workspace = "workspace";
    app.add_option("-w,--workspace", workspace, "Workspace directory")->capture_default_str();

    // ingest
    IngestOptions ingest;
    std::string ingest_basis = "time_spent";
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse raw inputs into the workspace");
    ingest_cmd->add_option("--occupancy", ingest.occupancy, "Occupancy CSV")->required();
    ingest_cmd->add_option("--blocks", ingest.blocks, "Blocks GeoJSON")->required();
    ingest_cmd->add_option("--pois", ingest.pois, "POIs GeoJSON")->required();
    ingest_cmd->add_option("--amenity-stats", ingest.amenity_stats, "Amenity stats CSV")->required();
    ingest_cmd->add_option("--basis", ingest_basis, "time_spent or area")->capture_default_str();
    ingest_cmd->add_option("--merge-distance", ingest.merge_distance, "Amenity merge radius in meters")
        ->capture_default_str();
    ingest_cmd->add_option("--extra-stats", ingest.extra_stats, "Stats CSV for the other basis");

    // cluster
    int k = 8;
    double ratio = kDefaultClusterRatio;
    std::uint64_t cluster_seed = 42;
    auto* cluster_cmd = app.add_subcommand("cluster", "Split blocks into monitored and unmonitored clusters");
    cluster_cmd->add_option("--k", k, "Clusters with parking data")->capture_default_str();
    cluster_cmd->add_option("--ratio", ratio, "Unmonitored-to-monitored cluster ratio")->capture_default_str();
    cluster_cmd->add_option("--seed", cluster_seed)->capture_default_str();

    // train
    TrainOptions train_opts;
    std::string learner = "gbt", datapoints = "aggregate";
    auto* train_cmd = app.add_subcommand("train", "Aggregate monitored clusters and train one model each");
    train_cmd->add_option("--learner", learner, "gbt (xgb) or dt")->capture_default_str();
    train_cmd->add_option("--seed", train_opts.seed)->capture_default_str();
    train_cmd->add_option("--datapoints", datapoints, "aggregate or all")->capture_default_str();
    train_cmd->add_option("--folds", train_opts.folds)->capture_default_str();

    // similarity
    std::string metric = "cosine", basis;
    auto* sim_cmd = app.add_subcommand("similarity", "Compute cluster representations and similarities");
    sim_cmd->add_option("--metric", metric, "cosine, emd or all")->capture_default_str();
    sim_cmd->add_option("--basis", basis, "time_spent or area (default: ingest basis)");

    // estimate
    EstimateOptions est;
    std::string est_date = "2017-11-04", est_metric = "cosine", est_basis;
    std::vector<int> hours;
    auto* est_cmd = app.add_subcommand("estimate", "Estimation intervals for an unmonitored cluster");
    est_cmd->add_option("--target", est.target, "Unmonitored cluster id, e.g. without-3")->required();
    est_cmd->add_option("--date", est_date)->capture_default_str();
    est_cmd->add_option("--metric", est_metric, "cosine or emd")->capture_default_str();
    est_cmd->add_option("--basis", est_basis, "time_spent or area (default: ingest basis)");
    est_cmd->add_option("--hours", hours, "Hours of day (default 0 3 6 ... 21)");
    est_cmd->add_flag("--fixed-inputs", est.fixed_inputs, "Use --price-rate/--total-spots instead of averages");
    est_cmd->add_option("--price-rate", est.price_rate)->capture_default_str();
    est_cmd->add_option("--total-spots", est.total_spots)->capture_default_str();

    // evaluate
    EvaluateOptions eval;
    std::string eval_basis = "time_spent", eval_dp = "aggregate:aggregate";
    auto* eval_cmd = app.add_subcommand("evaluate", "Pairwise transfer evaluation and correlation tables");
    eval_cmd->add_option("--k", eval.experiment.k)->capture_default_str();
    eval_cmd->add_option("--ratio", eval.experiment.ratio)->capture_default_str();
    eval_cmd->add_option("--merge-distance", eval.experiment.merge_distance)->capture_default_str();
    eval_cmd->add_option("--basis", eval_basis)->capture_default_str();
    eval_cmd->add_option("--datapoints", eval_dp, "source:target, each aggregate or all")->capture_default_str();
    eval_cmd->add_option("--seed", eval.experiment.seed)->capture_default_str();
    eval_cmd->add_option("--folds", eval.experiment.transfer.folds)->capture_default_str();
    eval_cmd->add_flag("--pooled", eval.experiment.pooled, "Correlate all pairs at once instead of per source");
    eval_cmd->add_flag("--total", eval.experiment.total_models, "Also compare extended total models");
    eval_cmd->add_flag("--grid", eval.grid, "Run k in {8,16} x merge distance in {100,200,400}");

    // synth
    SyntheticCityConfig synth;
    std::string synth_out = "synthetic";
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic city");
    synth_cmd->add_option("--blocks", synth.n_blocks)->capture_default_str();
    synth_cmd->add_option("--archetypes", synth.n_archetypes)->capture_default_str();
    synth_cmd->add_option("--days", synth.days)->capture_default_str();
    synth_cmd->add_option("--noise", synth.noise)->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
    synth_cmd->add_option("--out", synth_out, "Output directory")->capture_default_str();

    // serve
    std::string host = "127.0.0.1", serve_date = "2017-11-04";
    int port = 8080;
    ServeOptions serve_opts;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the workspace over HTTP");
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--port", port)->capture_default_str();
    serve_cmd->add_option("--date", serve_date, "Date of the precomputed time grid")->capture_default_str();
    serve_cmd->add_flag("--fixed-inputs", serve_opts.fixed_inputs);

    CLI11_PARSE(app, argc, argv);
    const fs::path ws(workspace);

    try {
        if (ingest_cmd->parsed()) {
            ingest.basis = parse_basis(ingest_basis);
            auto r = ingest_workspace(ws, ingest);
            std::cout << "records " << r.records << ", row errors " << r.row_errors.size() << "\n"
                      << "blocks " << r.blocks << " (" << r.monitored_blocks << " monitored), POIs " << r.pois << " ("
                      << r.pois_with_amenity << " with amenity, " << r.pois_unmatched << " unmatched)\n"
                      << "amenity occurrences " << r.occurrences << "\n";
            for (const auto& e : r.row_errors) {
                if (e.line) std::cerr << "line " << e.line << ": " << e.message << "\n";
                else std::cerr << e.message << "\n";
            }
            for (const auto& [name, n] : r.unknown_amenities) {
                std::cerr << "unknown amenity '" << name << "' (" << n << " occurrences)\n";
            }
        } else if (cluster_cmd->parsed()) {
            auto p = cluster_workspace(ws, k, ratio, cluster_seed);
            std::cout << p.k_with << " clusters with data, " << p.k_without << " without\n";
            for (const auto* g : {&p.clusters_with, &p.clusters_without}) {
                for (const auto& c : *g) std::cout << "  " << c.ref().key() << ": " << c.block_ids.size() << " blocks\n";
            }
        } else if (train_cmd->parsed()) {
            train_opts.learner = parse_learner(learner);
            train_opts.datapoints = parse_datapoints(datapoints);
            auto idx = train_workspace(ws, train_opts);
            for (const auto& [key, m] : idx.models) {
                std::cout << key << ": " << to_string(m.learner) << " cv_rmse " << fmt(100.0 * m.cv_rmse, 2) << "\n";
            }
        } else if (sim_cmd->parsed()) {
            const Basis b = basis.empty() ? load_manifest(ws).basis : parse_basis(basis);
            std::vector<Metric> metrics;
            if (metric == "all") metrics = {Metric::cosine, Metric::emd};
            else metrics = {parse_metric(metric)};
            for (Metric m : metrics) {
                auto r = similarity_workspace(ws, m, b);
                std::cout << "wrote " << similarity_path(ws, m, b).string() << " ("
                          << r.with_without.rows.size() << " x " << r.with_without.cols.size() << ")\n";
                for (const auto& c : r.empty_clusters) std::cerr << "cluster " << c << " has no amenities\n";
            }
        } else if (est_cmd->parsed()) {
            est.date = date_arg(est_date);
            est.metric = parse_metric(est_metric);
            if (!est_basis.empty()) est.basis = parse_basis(est_basis);
            if (!hours.empty()) est.hours = hours;
            for (const auto& t : estimate_workspace(ws, est)) write_estimate_table(std::cout, t);
        } else if (eval_cmd->parsed()) {
            eval.experiment.basis = parse_basis(eval_basis);
            const auto colon = eval_dp.find(':');
            if (colon == std::string::npos) throw InputError("--datapoints expects source:target");
            eval.experiment.transfer.train_on = parse_datapoints(eval_dp.substr(0, colon));
            eval.experiment.transfer.test_on = parse_datapoints(eval_dp.substr(colon + 1));
            for (const auto& r : evaluate_workspace(ws, eval)) {
                std::cout << "k " << r.config.k << ", merge " << r.config.merge_distance << " m:";
                for (const auto& [l, f] : r.best_fraction) std::cout << " best " << to_string(l) << " " << fmt(100 * f, 1) << "%";
                std::cout << "; cosine " << corr(r.cosine.mean_pearson) << " rank " << corr(r.cosine.mean_spearman)
                          << "; emd " << corr(r.emd.mean_pearson) << " rank " << corr(r.emd.mean_spearman) << "\n";
            }
            std::cout << "tables in " << (ws / "evaluation").string() << "\n";
        } else if (synth_cmd->parsed()) {
            auto city = generate_synthetic_city(synth);
            auto files = write_synthetic_city(city, synth_out);
            std::cout << files.blocks << "\n" << files.pois << "\n" << files.occupancy << "\n"
                      << files.amenity_stats << "\n";
        } else if (serve_cmd->parsed()) {
            serve_opts.date = date_arg(serve_date);
            Service service(ws, serve_opts);
            if (!service.complete()) {
                std::cerr << "warning: workspace incomplete; data endpoints will answer 409\n";
            }
            HttpServer server(service);
            const int bound = server.bind(host, port);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << "listening on http://" << host << ":" << bound << "\n" << std::flush;
            server.listen();
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
