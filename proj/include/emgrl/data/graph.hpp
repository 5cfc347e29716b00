#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "emgrl/data/frame.hpp"

namespace emgrl::data {

/// Farms as nodes, sorted by farm_id. neighbors[v] lists the out-neighbors
/// N(v) of node v, nearest first.
struct WindFarmGraph {
    std::vector<FarmMeta> nodes;
    std::vector<std::vector<std::size_t>> neighbors;
    std::size_t k = 0;

    std::size_t size() const noexcept { return nodes.size(); }
    /// Throws std::out_of_range for an unknown farm.
    std::size_t index_of(const std::string& farm_id) const;
    std::size_t edge_count() const;
    /// No self-loops, in-range indices, one neighbor list per node.
    void validate() const;
};

/// Great-circle distance in km on a sphere of radius 6371.0088 km.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

/// Directed k-nearest-neighbor graph under haversine distance. Ties break by
/// farm_id. Every node gets min(k, n - 1) out-edges.
WindFarmGraph build_graph(std::vector<FarmMeta> farms, std::size_t k);

/// Hop counts along out-edges from `source`; unreachable nodes get SIZE_MAX.
std::vector<std::size_t> hop_distances(const WindFarmGraph& graph, std::size_t source);

}  // namespace emgrl::data
