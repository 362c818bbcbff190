#include "nsis/graph.hpp"

#include "nsis/errors.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace nsis {

MultiGraph::MultiGraph(std::size_t n, std::span<const Edge> edges)
    : offsets_(n + 1, 0), loops_(n, 0), degree_(n, 0)
{
    if (n == 0)
        throw input_error("graph must have at least one vertex");

    std::vector<std::vector<vertex_t>> half(n);
    for (const Edge& e : edges) {
        if (e.u >= n || e.v >= n)
            throw input_error("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                              ") out of range for n=" + std::to_string(n));
        if (e.u == e.v) {
            ++loops_[e.u];
        } else {
            half[e.u].push_back(e.v);
            half[e.v].push_back(e.u);
        }
    }
    num_edges_ = edges.size();

    for (std::size_t x = 0; x < n; ++x) {
        auto& h = half[x];
        std::sort(h.begin(), h.end());
        for (std::size_t i = 0; i < h.size();) {
            std::size_t j = i;
            while (j < h.size() && h[j] == h[i])
                ++j;
            adjacency_.push_back({h[i], static_cast<std::uint32_t>(j - i)});
            i = j;
        }
        offsets_[x + 1] = adjacency_.size();
        degree_[x] = h.size();
        max_degree_ = std::max(max_degree_, degree_[x]);
        h.clear();
        h.shrink_to_fit();
    }
}

MultiGraph MultiGraph::edgeless(std::size_t n)
{
    return MultiGraph(n, std::span<const Edge>{});
}

MultiGraph MultiGraph::path(std::size_t n)
{
    std::vector<Edge> edges;
    for (std::size_t i = 0; i + 1 < n; ++i)
        edges.push_back({static_cast<vertex_t>(i), static_cast<vertex_t>(i + 1)});
    return MultiGraph(n, edges);
}

MultiGraph MultiGraph::cycle(std::size_t n)
{
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        edges.push_back({static_cast<vertex_t>(i), static_cast<vertex_t>((i + 1) % n)});
    return MultiGraph(n, edges);
}

MultiGraph MultiGraph::star(std::size_t n)
{
    std::vector<Edge> edges;
    for (std::size_t i = 1; i < n; ++i)
        edges.push_back({0, static_cast<vertex_t>(i)});
    return MultiGraph(n, edges);
}

void MultiGraph::check_vertex(vertex_t x) const
{
    if (x >= num_vertices())
        throw input_error("vertex " + std::to_string(x) + " out of range for n=" +
                          std::to_string(num_vertices()));
}

std::span<const Neighbor> MultiGraph::neighbors(vertex_t x) const
{
    assert(x < num_vertices());
    return {adjacency_.data() + offsets_[x], offsets_[x + 1] - offsets_[x]};
}

std::uint32_t MultiGraph::loops(vertex_t x) const
{
    check_vertex(x);
    return loops_[x];
}

std::uint32_t MultiGraph::multiplicity(vertex_t u, vertex_t v) const
{
    check_vertex(u);
    check_vertex(v);
    if (u == v)
        return loops_[u];
    const auto nb = neighbors(u);
    const auto it = std::lower_bound(nb.begin(), nb.end(), v,
                                     [](const Neighbor& a, vertex_t b) { return a.vertex < b; });
    return (it != nb.end() && it->vertex == v) ? it->multiplicity : 0;
}

std::size_t MultiGraph::degree(vertex_t x) const
{
    check_vertex(x);
    return degree_[x];
}

std::vector<Edge> MultiGraph::edge_list() const
{
    std::vector<Edge> out;
    out.reserve(num_edges_);
    for (vertex_t u = 0; u < num_vertices(); ++u) {
        // neighbours are sorted, so the loop slots in before any v > u
        bool loops_done = false;
        auto emit_loops = [&] {
            for (std::uint32_t k = 0; k < loops_[u]; ++k)
                out.push_back({u, u});
            loops_done = true;
        };
        for (const Neighbor& nb : neighbors(u)) {
            if (nb.vertex < u)
                continue;
            if (!loops_done)
                emit_loops();
            for (std::uint32_t k = 0; k < nb.multiplicity; ++k)
                out.push_back({u, nb.vertex});
        }
        if (!loops_done)
            emit_loops();
    }
    return out;
}

bool operator==(const MultiGraph& a, const MultiGraph& b)
{
    return a.offsets_ == b.offsets_ && a.adjacency_ == b.adjacency_ && a.loops_ == b.loops_;
}

Configuration::Configuration(std::size_t n, bool infected)
    : bits_(n, infected ? 1 : 0), infected_(infected ? n : 0)
{}

Configuration Configuration::from_index(std::size_t n, std::uint64_t index)
{
    if (n > 63)
        throw input_error("index encoding supports at most 63 vertices");
    if (n < 63 && (index >> n) != 0)
        throw input_error("configuration index out of range");
    Configuration c(n);
    for (std::size_t x = 0; x < n; ++x)
        if ((index >> x) & 1U)
            c.set(static_cast<vertex_t>(x), true);
    return c;
}

Configuration Configuration::from_string(std::string_view bits)
{
    Configuration c(bits.size());
    for (std::size_t x = 0; x < bits.size(); ++x) {
        if (bits[x] == '1')
            c.set(static_cast<vertex_t>(x), true);
        else if (bits[x] != '0')
            throw input_error("configuration string must contain only '0' and '1'");
    }
    return c;
}

std::uint64_t Configuration::to_index() const
{
    if (size() > 63)
        throw input_error("index encoding supports at most 63 vertices");
    std::uint64_t index = 0;
    for (std::size_t x = 0; x < size(); ++x)
        if (bits_[x])
            index |= std::uint64_t{1} << x;
    return index;
}

std::string Configuration::to_string() const
{
    std::string s(size(), '0');
    for (std::size_t x = 0; x < size(); ++x)
        if (bits_[x])
            s[x] = '1';
    return s;
}

bool Configuration::at(vertex_t x) const
{
    if (x >= size())
        throw input_error("vertex " + std::to_string(x) + " out of range");
    return bits_[x] != 0;
}

void Configuration::set(vertex_t x, bool infected)
{
    assert(x < size());
    const std::uint8_t b = infected ? 1 : 0;
    if (bits_[x] != b) {
        bits_[x] = b;
        infected_ += infected ? 1 : std::size_t(-1);
    }
    check_invariant();
}

void Configuration::flip(vertex_t x)
{
    set(x, bits_[x] == 0);
}

void Configuration::check_invariant() const
{
#ifndef NDEBUG
    assert(static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)) == infected_);
#endif
}

std::size_t neighbor_degree(const MultiGraph& g, vertex_t x)
{
    return g.degree(x);
}

std::size_t max_degree(const MultiGraph& g)
{
    return g.max_degree();
}

std::size_t infected_neighbors(const MultiGraph& g, const Configuration& sigma, vertex_t x)
{
    if (sigma.size() != g.num_vertices())
        throw input_error("configuration length " + std::to_string(sigma.size()) +
                          " does not match graph size " + std::to_string(g.num_vertices()));
    if (x >= g.num_vertices())
        throw input_error("vertex " + std::to_string(x) + " out of range");
    return infected_neighbors_unchecked(g, sigma, x);
}

bool precedes(const Configuration& sigma, const Configuration& eta)
{
    if (sigma.size() != eta.size())
        throw input_error("configuration lengths differ");
    for (std::size_t x = 0; x < sigma.size(); ++x)
        if (sigma[static_cast<vertex_t>(x)] && !eta[static_cast<vertex_t>(x)])
            return false;
    return true;
}

namespace {

constexpr std::string_view kHeaderPrefix = "nsis-graph v1 n=";

bool is_blank(std::string_view s)
{
    return s.find_first_not_of(" \t") == std::string_view::npos;
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::uint64_t parse_count(std::string_view tok, std::size_t line, const char* what)
{
    if (tok.empty())
        throw parse_error(line, std::string("missing ") + what);
    if (tok.front() == '-')
        throw parse_error(line, std::string("negative ") + what + " '" + std::string(tok) + "'");
    std::uint64_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw parse_error(line, std::string("malformed ") + what + " '" + std::string(tok) + "'");
    return v;
}

} // namespace

MultiGraph parse_graph(std::string_view text)
{
    std::size_t line_no = 0;
    std::size_t n = 0;
    bool have_header = false;
    std::vector<Edge> edges;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (is_blank(line) || trim(line).front() == '#') {
            if (end == text.size())
                break;
            continue;
        }

        line = trim(line);
        if (!have_header) {
            if (line.substr(0, kHeaderPrefix.size()) != kHeaderPrefix)
                throw parse_error(line_no, "expected header 'nsis-graph v1 n=<N>'");
            const std::uint64_t count = parse_count(line.substr(kHeaderPrefix.size()), line_no,
                                                    "vertex count");
            if (count == 0)
                throw parse_error(line_no, "vertex count must be at least 1");
            if (count > std::numeric_limits<vertex_t>::max())
                throw parse_error(line_no, "vertex count too large");
            n = static_cast<std::size_t>(count);
            have_header = true;
        } else {
            const auto sep = line.find_first_of(" \t");
            if (sep == std::string_view::npos)
                throw parse_error(line_no, "expected two vertex indices");
            const std::string_view a = line.substr(0, sep);
            const std::string_view b = trim(line.substr(sep));
            if (b.find_first_of(" \t") != std::string_view::npos)
                throw parse_error(line_no, "expected exactly two vertex indices");
            const std::uint64_t u = parse_count(a, line_no, "vertex index");
            const std::uint64_t v = parse_count(b, line_no, "vertex index");
            if (u >= n || v >= n)
                throw parse_error(line_no, "vertex index " + std::to_string(std::max(u, v)) +
                                               " out of range for n=" + std::to_string(n));
            edges.push_back({static_cast<vertex_t>(u), static_cast<vertex_t>(v)});
        }
        if (end == text.size())
            break;
    }
    if (!have_header)
        throw parse_error(line_no == 0 ? 1 : line_no, "missing header");
    return MultiGraph(n, edges);
}

std::string serialize_graph(const MultiGraph& g)
{
    std::string out;
    out += kHeaderPrefix;
    out += std::to_string(g.num_vertices());
    out += '\n';
    for (const Edge& e : g.edge_list()) {
        out += std::to_string(e.u);
        out += ' ';
        out += std::to_string(e.v);
        out += '\n';
    }
    return out;
}

MultiGraph read_graph_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw input_error("cannot open graph file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_graph(ss.str());
}

void write_graph_file(const std::filesystem::path& path, const MultiGraph& g)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw input_error("cannot write graph file " + path.string());
    out << serialize_graph(g);
}

} // namespace nsis
