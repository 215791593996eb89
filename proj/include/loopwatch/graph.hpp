#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace loopwatch {

enum class Coordinate { X, Y, Z };

// One measured baseline component: directed arc tail -> head, weight in meters.
struct Arc {
    int tail = -1;
    int head = -1;
    double weight = 0.0;
};

// Per-coordinate measurement digraph. Vertices keep input order; at most one
// arc per unordered vertex pair; no self-loops; finite weights. Build once,
// then treat as immutable -- all analysis operations are pure functions.
class WeightedDigraph {
public:
    WeightedDigraph() = default;

    // Returns the vertex index, inserting the label on first sight.
    int add_vertex(const std::string& label);
    void add_arc(int tail, int head, double weight);
    void add_arc(const std::string& tail, const std::string& head, double weight);

    int order() const { return static_cast<int>(labels_.size()); }
    int size() const { return static_cast<int>(arcs_.size()); }

    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(int v) const { return labels_[static_cast<std::size_t>(v)]; }
    int find_vertex(std::string_view label) const; // -1 if absent

    const std::vector<Arc>& arcs() const { return arcs_; }
    const Arc& arc(int i) const { return arcs_[static_cast<std::size_t>(i)]; }
    // Index of the arc joining {u, v} in either direction, -1 if none.
    int find_arc_between(int u, int v) const;

    // (neighbor, arc index) pairs in arc input order; underlying-graph adjacency.
    const std::vector<std::pair<int, int>>& incident(int v) const {
        return incident_[static_cast<std::size_t>(v)];
    }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> index_;
    std::vector<Arc> arcs_;
    std::vector<std::vector<std::pair<int, int>>> incident_;
};

// Spanning-tree node potential; potential(root) = 0.
struct GaugePotential {
    Eigen::VectorXd potential;
    int root = 0;
};

// Reads the baseline CSV (header "from,to,dx,dy,dz", or "from,to,w" for
// single-coordinate files; '#' comments) and projects one coordinate.
WeightedDigraph load_network(std::istream& in, Coordinate coord);
WeightedDigraph load_network_file(const std::string& path, Coordinate coord);

// Header probe: true when the file is in the single-coordinate "from,to,w" form.
bool file_is_single_coordinate(const std::string& path);

// Flips every negative-weight arc; zero-weight arcs keep their orientation.
WeightedDigraph normalize_orientation(const WeightedDigraph& g);

// BFS tree over the underlying graph, rooted at the first input vertex,
// children visited in arc input order. Returns |V|-1 arc indices.
// Throws ValidationError naming unreachable vertices when disconnected.
std::vector<int> spanning_tree(const WeightedDigraph& g);

// Subtracts the spanning-tree potential from every weight: tree arcs become
// exactly 0, non-tree arcs carry the signed loop-closure errors. Diagonal
// similarity of A(z), so diagonals of powers, traces, and spectra are
// unchanged while exponent magnitudes drop to closure size.
std::pair<WeightedDigraph, GaugePotential> gauge_fix(const WeightedDigraph& g);

// Weakly connected components as vertex-index lists (input order within and
// across components).
std::vector<std::vector<int>> weak_components(const WeightedDigraph& g);

// Induced subgraph on the given vertices, preserving label and arc order.
WeightedDigraph subnetwork(const WeightedDigraph& g, const std::vector<int>& vertices);

// Writes a single-coordinate baseline CSV ("from,to,w").
void write_network_csv(std::ostream& out, const WeightedDigraph& g);

} // namespace loopwatch
