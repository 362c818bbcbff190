#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nsis {

using vertex_t = std::uint32_t;

struct Edge {
    vertex_t u;
    vertex_t v;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
    vertex_t vertex;
    std::uint32_t multiplicity;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Undirected multigraph on vertices 0..n-1. Parallel edges and self-loops
/// are allowed. Immutable after construction; safe to share across threads.
///
/// Adjacency is kept in CSR form with one entry per distinct neighbour and
/// its multiplicity. Self-loops are stored separately as a per-vertex count
/// and never appear in neighbors().
class MultiGraph {
public:
    MultiGraph(std::size_t n, std::span<const Edge> edges);
    MultiGraph(std::size_t n, std::initializer_list<Edge> edges)
        : MultiGraph(n, std::span<const Edge>(edges.begin(), edges.size()))
    {}

    static MultiGraph edgeless(std::size_t n);
    static MultiGraph path(std::size_t n);
    // For n = 2 this is the double edge 0-1; n = 1 is a single self-loop.
    static MultiGraph cycle(std::size_t n);
    // Centre 0, leaves 1..n-1.
    static MultiGraph star(std::size_t n);

    std::size_t num_vertices() const noexcept { return loops_.size(); }
    // Edge instances, self-loops included.
    std::size_t num_edges() const noexcept { return num_edges_; }

    std::span<const Neighbor> neighbors(vertex_t x) const;
    std::uint32_t loops(vertex_t x) const;
    std::uint32_t multiplicity(vertex_t u, vertex_t v) const;

    // Sum of non-loop multiplicities at x (cached).
    std::size_t degree(vertex_t x) const;
    std::size_t max_degree() const noexcept { return max_degree_; }

    // Every edge instance once, sorted by (min endpoint, max endpoint).
    std::vector<Edge> edge_list() const;

    friend bool operator==(const MultiGraph& a, const MultiGraph& b);

private:
    void check_vertex(vertex_t x) const;

    std::vector<std::size_t> offsets_;
    std::vector<Neighbor> adjacency_;
    std::vector<std::uint32_t> loops_;
    std::vector<std::size_t> degree_;
    std::size_t num_edges_ = 0;
    std::size_t max_degree_ = 0;
};

/// One infected (1) / susceptible (0) bit per vertex with a cached count of
/// infected vertices.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::size_t n, bool infected = false);

    static Configuration all_susceptible(std::size_t n) { return Configuration(n, false); }
    static Configuration all_infected(std::size_t n) { return Configuration(n, true); }
    // Bit x of `index` is the state of vertex x. Requires n <= 63.
    static Configuration from_index(std::size_t n, std::uint64_t index);
    // "0110" -> vertex 0 susceptible, vertices 1 and 2 infected, ...
    static Configuration from_string(std::string_view bits);

    std::uint64_t to_index() const;
    std::string to_string() const;

    std::size_t size() const noexcept { return bits_.size(); }
    std::size_t infected_count() const noexcept { return infected_; }

    bool operator[](vertex_t x) const noexcept { return bits_[x] != 0; }
    bool at(vertex_t x) const;
    void set(vertex_t x, bool infected);
    void flip(vertex_t x);

    friend bool operator==(const Configuration& a, const Configuration& b)
    {
        return a.bits_ == b.bits_;
    }

private:
    void check_invariant() const;

    std::vector<std::uint8_t> bits_;
    std::size_t infected_ = 0;
};

std::size_t neighbor_degree(const MultiGraph& g, vertex_t x);
std::size_t max_degree(const MultiGraph& g);

// Infected neighbours of x counted over non-loop edge instances.
std::size_t infected_neighbors(const MultiGraph& g, const Configuration& sigma, vertex_t x);

// Unchecked hot-loop variant; sizes must already agree.
inline std::size_t infected_neighbors_unchecked(const MultiGraph& g, const Configuration& sigma,
                                                vertex_t x)
{
    std::size_t count = 0;
    for (const Neighbor& nb : g.neighbors(x))
        count += sigma[nb.vertex] ? nb.multiplicity : 0;
    return count;
}

// Coordinatewise order: sigma <= eta iff sigma_x <= eta_x for every x.
bool precedes(const Configuration& sigma, const Configuration& eta);

/// Edge-list text format:
///
///     nsis-graph v1 n=<N>
///     u v            (one edge instance per line; "u u" is a self-loop)
///
/// Lines starting with '#' and blank lines are ignored. serialize_graph()
/// emits the canonical form: LF endings, edges sorted by (min, max).
MultiGraph parse_graph(std::string_view text);
std::string serialize_graph(const MultiGraph& g);

MultiGraph read_graph_file(const std::filesystem::path& path);
void write_graph_file(const std::filesystem::path& path, const MultiGraph& g);

} // namespace nsis
