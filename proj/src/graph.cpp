#include "loopwatch/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

#include "loopwatch/errors.hpp"

namespace loopwatch {

int WeightedDigraph::add_vertex(const std::string& label) {
    if (label.empty())
        throw ValidationError("vertex label must be nonempty");
    auto it = index_.find(label);
    if (it != index_.end())
        return it->second;
    int id = order();
    index_.emplace(label, id);
    labels_.push_back(label);
    incident_.emplace_back();
    return id;
}

void WeightedDigraph::add_arc(int tail, int head, double weight) {
    if (tail < 0 || tail >= order() || head < 0 || head >= order())
        throw ValidationError("arc endpoint out of range");
    if (tail == head)
        throw ValidationError("self-loop at vertex '" + label(tail) + "'");
    if (!std::isfinite(weight))
        throw ValidationError("non-finite weight on arc '" + label(tail) + "' -> '" +
                              label(head) + "'");
    if (find_arc_between(tail, head) >= 0)
        throw ValidationError("duplicate baseline between '" + label(tail) + "' and '" +
                              label(head) + "'");
    int id = size();
    arcs_.push_back({tail, head, weight});
    incident_[static_cast<std::size_t>(tail)].emplace_back(head, id);
    incident_[static_cast<std::size_t>(head)].emplace_back(tail, id);
}

void WeightedDigraph::add_arc(const std::string& tail, const std::string& head, double weight) {
    int t = add_vertex(tail);
    int h = add_vertex(head);
    add_arc(t, h, weight);
}

int WeightedDigraph::find_vertex(std::string_view label) const {
    auto it = index_.find(std::string(label));
    return it == index_.end() ? -1 : it->second;
}

int WeightedDigraph::find_arc_between(int u, int v) const {
    for (const auto& [w, id] : incident_[static_cast<std::size_t>(u)])
        if (w == v)
            return id;
    return -1;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        auto b = field.find_first_not_of(" \t\r");
        auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',')
        out.push_back("");
    return out;
}

double parse_weight(const std::string& s, int line_no) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(line_no, "bad numeric field '" + s + "'");
    }
}

bool is_blank_or_comment(const std::string& line) {
    for (char c : line) {
        if (c == '#')
            return true;
        if (!std::isspace(static_cast<unsigned char>(c)))
            return false;
    }
    return true;
}

// single-coord header "from,to,w" -> 3 fields; full header -> 5 fields
int header_width(const std::vector<std::string>& fields, int line_no) {
    if (fields.size() == 3 && fields[0] == "from" && fields[1] == "to" && fields[2] == "w")
        return 3;
    if (fields.size() == 5 && fields[0] == "from" && fields[1] == "to" && fields[2] == "dx" &&
        fields[3] == "dy" && fields[4] == "dz")
        return 5;
    throw ParseError(line_no, "expected header 'from,to,dx,dy,dz' or 'from,to,w'");
}

} // namespace

WeightedDigraph load_network(std::istream& in, Coordinate coord) {
    WeightedDigraph g;
    std::string line;
    int line_no = 0;
    int width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank_or_comment(line))
            continue;
        auto fields = split_csv(line);
        if (width == 0) {
            width = header_width(fields, line_no);
            continue;
        }
        if (static_cast<int>(fields.size()) != width)
            throw ParseError(line_no, "expected " + std::to_string(width) + " fields, got " +
                                          std::to_string(fields.size()));
        if (fields[0].empty() || fields[1].empty())
            throw ParseError(line_no, "empty vertex label");
        double w;
        if (width == 3) {
            w = parse_weight(fields[2], line_no);
        } else {
            int col = 2 + static_cast<int>(coord);
            w = parse_weight(fields[static_cast<std::size_t>(col)], line_no);
            // validate the remaining coordinate fields even when unused
            for (int c = 2; c < 5; ++c)
                if (c != col)
                    parse_weight(fields[static_cast<std::size_t>(c)], line_no);
        }
        try {
            g.add_arc(fields[0], fields[1], w);
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (width == 0)
        throw ParseError(line_no, "empty input: no header found");
    return g;
}

WeightedDigraph load_network_file(const std::string& path, Coordinate coord) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    return load_network(in, coord);
}

bool file_is_single_coordinate(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank_or_comment(line))
            continue;
        return header_width(split_csv(line), line_no) == 3;
    }
    throw ParseError(line_no, "empty input: no header found");
}

WeightedDigraph normalize_orientation(const WeightedDigraph& g) {
    WeightedDigraph out;
    for (const auto& l : g.labels())
        out.add_vertex(l);
    for (const auto& a : g.arcs()) {
        if (a.weight < 0.0)
            out.add_arc(a.head, a.tail, -a.weight);
        else
            out.add_arc(a.tail, a.head, a.weight);
    }
    return out;
}

namespace {

// BFS from vertex 0; returns (parent arc index per vertex, visit order).
std::pair<std::vector<int>, std::vector<int>> bfs_tree(const WeightedDigraph& g) {
    int n = g.order();
    std::vector<int> parent_arc(static_cast<std::size_t>(n), -1);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> order;
    if (n == 0)
        return {parent_arc, order};
    std::deque<int> q{0};
    seen[0] = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        order.push_back(u);
        for (const auto& [v, id] : g.incident(u)) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                parent_arc[static_cast<std::size_t>(v)] = id;
                q.push_back(v);
            }
        }
    }
    return {parent_arc, order};
}

} // namespace

std::vector<int> spanning_tree(const WeightedDigraph& g) {
    auto [parent_arc, order] = bfs_tree(g);
    if (static_cast<int>(order.size()) != g.order()) {
        std::string missing;
        std::vector<char> seen(static_cast<std::size_t>(g.order()), 0);
        for (int v : order)
            seen[static_cast<std::size_t>(v)] = 1;
        for (int v = 0; v < g.order(); ++v)
            if (!seen[static_cast<std::size_t>(v)])
                missing += (missing.empty() ? "" : ", ") + g.label(v);
        throw ValidationError("network is disconnected; unreachable vertices: " + missing);
    }
    std::vector<int> tree;
    tree.reserve(order.size());
    for (int v : order)
        if (parent_arc[static_cast<std::size_t>(v)] >= 0)
            tree.push_back(parent_arc[static_cast<std::size_t>(v)]);
    std::sort(tree.begin(), tree.end());
    return tree;
}

std::pair<WeightedDigraph, GaugePotential> gauge_fix(const WeightedDigraph& g) {
    std::vector<int> tree = spanning_tree(g);
    int n = g.order();
    std::vector<char> in_tree(static_cast<std::size_t>(g.size()), 0);
    for (int id : tree)
        in_tree[static_cast<std::size_t>(id)] = 1;

    Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
    std::vector<char> have(static_cast<std::size_t>(n), 0);
    have[0] = 1;
    // propagate along tree arcs until all potentials settle
    for (int pass = 0; pass < n; ++pass) {
        bool progress = false;
        for (int id : tree) {
            const Arc& a = g.arc(id);
            if (have[static_cast<std::size_t>(a.tail)] && !have[static_cast<std::size_t>(a.head)]) {
                phi[a.head] = phi[a.tail] + a.weight;
                have[static_cast<std::size_t>(a.head)] = 1;
                progress = true;
            } else if (have[static_cast<std::size_t>(a.head)] &&
                       !have[static_cast<std::size_t>(a.tail)]) {
                phi[a.tail] = phi[a.head] - a.weight;
                have[static_cast<std::size_t>(a.tail)] = 1;
                progress = true;
            }
        }
        if (!progress)
            break;
    }

    WeightedDigraph out;
    for (const auto& l : g.labels())
        out.add_vertex(l);
    for (int id = 0; id < g.size(); ++id) {
        const Arc& a = g.arc(id);
        // tree arcs are zero by construction of phi; avoid float residue
        double w = in_tree[static_cast<std::size_t>(id)]
                       ? 0.0
                       : a.weight - (phi[a.head] - phi[a.tail]);
        out.add_arc(a.tail, a.head, w);
    }
    return {std::move(out), GaugePotential{std::move(phi), 0}};
}

std::vector<std::vector<int>> weak_components(const WeightedDigraph& g) {
    int n = g.order();
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    int ncomp = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0)
            continue;
        std::deque<int> q{s};
        comp[static_cast<std::size_t>(s)] = ncomp;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (const auto& [v, id] : g.incident(u)) {
                if (comp[static_cast<std::size_t>(v)] < 0) {
                    comp[static_cast<std::size_t>(v)] = ncomp;
                    q.push_back(v);
                }
            }
        }
        ++ncomp;
    }
    std::vector<std::vector<int>> out(static_cast<std::size_t>(ncomp));
    for (int v = 0; v < n; ++v)
        out[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])].push_back(v);
    return out;
}

WeightedDigraph subnetwork(const WeightedDigraph& g, const std::vector<int>& vertices) {
    WeightedDigraph out;
    std::vector<int> remap(static_cast<std::size_t>(g.order()), -1);
    for (int v : vertices)
        remap[static_cast<std::size_t>(v)] = out.add_vertex(g.label(v));
    for (const auto& a : g.arcs()) {
        int t = remap[static_cast<std::size_t>(a.tail)];
        int h = remap[static_cast<std::size_t>(a.head)];
        if (t >= 0 && h >= 0)
            out.add_arc(t, h, a.weight);
    }
    return out;
}

void write_network_csv(std::ostream& out, const WeightedDigraph& g) {
    out << "from,to,w\n";
    char buf[40];
    for (const auto& a : g.arcs()) {
        std::snprintf(buf, sizeof buf, "%.12g", a.weight);
        out << g.label(a.tail) << ',' << g.label(a.head) << ',' << buf << '\n';
    }
}

} // namespace loopwatch
