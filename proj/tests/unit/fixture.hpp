#pragma once

#include <filesystem>
#include <string>

#include "parkcast/synth.hpp"
#include "parkcast/workspace.hpp"

namespace parkcast::testing {

inline constexpr int kFixtureK = 3;

inline SyntheticCityConfig fixture_city() {
    SyntheticCityConfig c;
    c.n_blocks = 80;
    c.days = 7;
    c.seed = 5;
    return c;
}

/// Runs synth, ingest, cluster, train and both similarities into `root/ws`.
inline fs::path build_fixture_workspace(const fs::path& root) {
    fs::remove_all(root);
    const auto files = write_synthetic_city(generate_synthetic_city(fixture_city()), (root / "raw").string());
    const fs::path ws = root / "ws";
    IngestOptions in;
    in.occupancy = files.occupancy;
    in.blocks = files.blocks;
    in.pois = files.pois;
    in.amenity_stats = files.amenity_stats;
    ingest_workspace(ws, in);
    cluster_workspace(ws, kFixtureK, kDefaultClusterRatio, 42);
    train_workspace(ws, TrainOptions{});
    similarity_workspace(ws, Metric::cosine, Basis::time_spent);
    similarity_workspace(ws, Metric::emd, Basis::time_spent);
    return ws;
}

/// Shared, built once per process.
inline const fs::path& fixture_workspace() {
    static const fs::path ws = build_fixture_workspace(fs::temp_directory_path() / "parkcast_fixture");
    return ws;
}

}  // namespace parkcast::testing
