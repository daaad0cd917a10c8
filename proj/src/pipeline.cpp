#include "parkcast/pipeline.hpp"

#include <set>

#include "parkcast/error.hpp"

namespace parkcast {

const AmenityTable& CityData::stats_for(Basis basis) const {
    auto it = stats.find(basis);
    if (it == stats.end()) {
        throw PreconditionError("no amenity statistics for basis '" + std::string(to_string(basis)) + "'");
    }
    return it->second;
}

CityData city_from_synthetic(const SyntheticCity& city) {
    CityData d;
    d.blocks = city.blocks;
    d.pois = city.pois;
    d.records = city.occupancy;
    d.stats.emplace(Basis::time_spent, city.stats);
    auto area = area_stats_from_pois(city.pois);
    if (!area.entries.empty()) d.stats.emplace(Basis::area, std::move(area));
    return d;
}

std::map<std::string, std::vector<OccupancyRecord>> records_by_cluster(const ClusterPartition& partition,
                                                                      const std::vector<OccupancyRecord>& records) {
    std::map<std::string, std::string, std::less<>> owner;
    for (const auto& c : partition.clusters_with) {
        for (const auto& b : c.block_ids) owner.emplace(b, c.ref().key());
    }
    std::map<std::string, std::vector<OccupancyRecord>> out;
    for (const auto& c : partition.clusters_with) out[c.ref().key()];
    for (const auto& r : records) {
        auto it = owner.find(r.block_id);
        if (it != owner.end()) out[it->second].push_back(r);
    }
    return out;
}

std::vector<ClusterData> build_cluster_data(const ClusterPartition& partition,
                                            const std::vector<OccupancyRecord>& records, OccupancyMode mode) {
    const auto grouped = records_by_cluster(partition, records);
    std::vector<ClusterData> out;
    for (const auto& c : partition.clusters_with) {
        const auto key = c.ref().key();
        const auto& recs = grouped.at(key);
        std::set<std::string, std::less<>> blocks(c.block_ids.begin(), c.block_ids.end());
        ClusterData d;
        d.cluster = key;
        d.aggregate = Dataset::from_points(aggregate_cluster(recs, blocks, mode));
        d.aggregate.source_cluster = key;
        d.all = Dataset::from_records(recs);
        d.all.source_cluster = key;
        out.push_back(std::move(d));
    }
    return out;
}

RepresentationSet represent_partition(const ClusterPartition& partition, const BlockAmenityIndex& index,
                                      const AmenityTable& stats) {
    RepresentationSet set;
    set.basis = stats.basis;
    set.support = support_spec(stats);
    const auto scheme = CategoryScheme::for_basis(stats.basis);
    for (const auto* group : {&partition.clusters_with, &partition.clusters_without}) {
        for (const auto& c : *group) {
            ClusterRepresentation rep;
            rep.cluster = c.ref().key();
            auto amenities = cluster_amenities(c.block_ids, index);
            rep.vector = build_cluster_vector(amenities, stats, scheme, &set.diagnostics);
            // Unknown names were already counted by the vector pass.
            rep.gaussian = build_cluster_gaussian(amenities, stats, set.support);
            set.amenities.emplace(rep.cluster, std::move(amenities));
            (c.group == Group::with_data ? set.with_data : set.without_data).push_back(std::move(rep));
        }
    }
    return set;
}

std::vector<std::string> extended_feature_names() {
    std::vector<std::string> names;
    for (int i = 1; i <= CategoryScheme::kCategories; ++i) names.push_back("category_" + std::to_string(i));
    names.push_back("gaussian_magnitude");
    return names;
}

std::map<std::string, ClusterFeatures> extended_features(const RepresentationSet& reps) {
    std::map<std::string, ClusterFeatures> out;
    for (const auto* group : {&reps.with_data, &reps.without_data}) {
        for (const auto& r : *group) {
            ClusterFeatures f;
            for (int c : r.vector.counts) f.values.push_back(c);
            f.values.push_back(gaussian_magnitude_feature(r.gaussian));
            out.emplace(r.cluster, std::move(f));
        }
    }
    return out;
}

ExperimentResult run_experiment(const CityData& city, const ExperimentConfig& config) {
    if (config.learners.empty()) throw PreconditionError("run_experiment: no learners");
    ExperimentResult result;
    result.config = config;

    const auto partition = partition_city(city.blocks, config.k, config.ratio, config.seed);
    const auto index = match_amenities(city.blocks, city.pois, config.merge_distance);
    const auto& stats = city.stats_for(config.basis);
    const auto reps = represent_partition(partition, index, stats);
    const auto clusters = build_cluster_data(partition, city.records);

    std::vector<TransferErrorMatrix> matrices;
    for (Learner l : config.learners) {
        auto t = pairwise_transfer(clusters, l, config.seed, config.transfer);
        double sum = 0.0;
        for (const auto& [pair, v] : t.errors.entries) sum += v;
        result.mean_error[l] = t.errors.entries.empty() ? 0.0 : sum / static_cast<double>(t.errors.entries.size());
        matrices.push_back(t.errors);
        result.errors.emplace(l, std::move(t.errors));
    }
    const auto fractions = best_method_fractions(matrices);
    for (std::size_t i = 0; i < config.learners.size(); ++i) result.best_fraction[config.learners[i]] = fractions[i];

    const auto& errors = result.errors.at(config.learners.back());
    result.cosine = correlate_similarity_errors(
        errors, similarity_matrix(Metric::cosine, config.basis, reps.with_data, reps.with_data), config.pooled);
    result.emd = correlate_similarity_errors(
        errors, similarity_matrix(Metric::emd, config.basis, reps.with_data, reps.with_data), config.pooled);

    if (config.total_models) {
        result.total = extended_total_models(clusters, extended_features(reps), extended_feature_names(),
                                             config.learners.back(), config.seed, config.transfer.train_on,
                                             config.transfer.folds);
    }
    return result;
}

}  // namespace parkcast
