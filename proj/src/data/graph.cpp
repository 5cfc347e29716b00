#include "emgrl/data/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace emgrl::data {

std::size_t WindFarmGraph::index_of(const std::string& farm_id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].farm_id == farm_id) return i;
    throw std::out_of_range("WindFarmGraph: unknown farm '" + farm_id + "'");
}

std::size_t WindFarmGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& nb : neighbors) n += nb.size();
    return n;
}

void WindFarmGraph::validate() const {
    if (neighbors.size() != nodes.size()) throw std::invalid_argument("WindFarmGraph: one neighbor list per node");
    for (std::size_t v = 0; v < neighbors.size(); ++v)
        for (std::size_t u : neighbors[v]) {
            if (u >= nodes.size()) throw std::invalid_argument("WindFarmGraph: neighbor index out of range");
            if (u == v) throw std::invalid_argument("WindFarmGraph: self-loop at '" + nodes[v].farm_id + "'");
        }
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kEarthRadiusKm = 6371.0088;
    constexpr double kRad = std::numbers::pi / 180.0;
    const double dlat = (lat2 - lat1) * kRad;
    const double dlon = (lon2 - lon1) * kRad;
    const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1 * kRad) * std::cos(lat2 * kRad) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

WindFarmGraph build_graph(std::vector<FarmMeta> farms, std::size_t k) {
    if (farms.empty()) throw std::invalid_argument("build_graph: no farms");
    for (const auto& f : farms) f.validate();
    std::sort(farms.begin(), farms.end(), [](const FarmMeta& a, const FarmMeta& b) { return a.farm_id < b.farm_id; });
    for (std::size_t i = 1; i < farms.size(); ++i)
        if (farms[i].farm_id == farms[i - 1].farm_id)
            throw std::invalid_argument("build_graph: duplicate farm_id '" + farms[i].farm_id + "'");

    WindFarmGraph g;
    g.k = k;
    g.nodes = std::move(farms);
    const std::size_t n = g.nodes.size();
    const std::size_t degree = std::min(k, n - 1);
    g.neighbors.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        std::vector<std::tuple<double, std::string, std::size_t>> cand;
        for (std::size_t u = 0; u < n; ++u) {
            if (u == v) continue;
            cand.emplace_back(haversine_km(g.nodes[v].latitude, g.nodes[v].longitude, g.nodes[u].latitude,
                                           g.nodes[u].longitude),
                              g.nodes[u].farm_id, u);
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(degree), cand.end());
        for (std::size_t i = 0; i < degree; ++i) g.neighbors[v].push_back(std::get<2>(cand[i]));
    }
    return g;
}

std::vector<std::size_t> hop_distances(const WindFarmGraph& graph, std::size_t source) {
    std::vector<std::size_t> dist(graph.size(), std::numeric_limits<std::size_t>::max());
    std::queue<std::size_t> q;
    dist.at(source) = 0;
    q.push(source);
    while (!q.empty()) {
        const std::size_t v = q.front();
        q.pop();
        for (std::size_t u : graph.neighbors[v])
            if (dist[u] == std::numeric_limits<std::size_t>::max()) {
                dist[u] = dist[v] + 1;
                q.push(u);
            }
    }
    return dist;
}

}  // namespace emgrl::data
