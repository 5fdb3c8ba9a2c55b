#include "lipreg/constraint_graph.hpp"

#include "lipreg/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

namespace lipreg {

namespace {

ConstraintGraph::Edge make_edge(const LabeledDataset& d, double L, int i, int j) {
    if (i > j) std::swap(i, j);
    double dist = (d.inputs.row(i) - d.inputs.row(j)).norm();
    if (dist <= 0.0)
        throw ValidationError("zero-length constraint edge between points " + std::to_string(i) +
                              " and " + std::to_string(j));
    return ConstraintGraph::Edge{i, j, dist, L * dist};
}

void sort_edges(std::vector<ConstraintGraph::Edge>& edges) {
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
}

// Prim's algorithm on the full Euclidean distance matrix.
std::vector<std::pair<int, int>> euclidean_mst(const LabeledDataset& d) {
    const int n = d.n();
    std::vector<std::pair<int, int>> tree;
    if (n < 2) return tree;
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<int> best_from(n, 0);
    in_tree[0] = true;
    for (int v = 1; v < n; ++v) best[v] = (d.inputs.row(0) - d.inputs.row(v)).norm();
    for (int step = 1; step < n; ++step) {
        int pick = -1;
        double pick_dist = std::numeric_limits<double>::infinity();
        for (int v = 0; v < n; ++v)
            if (!in_tree[v] && best[v] < pick_dist) {
                pick = v;
                pick_dist = best[v];
            }
        in_tree[pick] = true;
        tree.emplace_back(std::min(best_from[pick], pick), std::max(best_from[pick], pick));
        for (int v = 0; v < n; ++v)
            if (!in_tree[v]) {
                double dist = (d.inputs.row(pick) - d.inputs.row(v)).norm();
                if (dist < best[v]) {
                    best[v] = dist;
                    best_from[v] = pick;
                }
            }
    }
    return tree;
}

} // namespace

bool ConstraintGraph::connected() const {
    if (n <= 1) return true;
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : edges) {
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }
    std::vector<bool> seen(n, false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    int reached = 1;
    while (!frontier.empty()) {
        int u = frontier.front();
        frontier.pop();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = true;
                ++reached;
                frontier.push(v);
            }
    }
    return reached == n;
}

ConstraintGraph ConstraintGraph::with_budget(LipschitzBudget L) const {
    ConstraintGraph g = *this;
    g.lipschitz = L.value();
    for (auto& e : g.edges) e.radius = L.value() * e.dist;
    return g;
}

std::string ConstraintGraph::to_json_string() const {
    nlohmann::json j;
    j["n"] = n;
    j["lipschitz"] = lipschitz;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : edges)
        arr.push_back({{"i", e.i}, {"j", e.j}, {"dist", e.dist}, {"radius", e.radius}});
    j["edges"] = std::move(arr);
    return j.dump(2);
}

ConstraintGraph complete_graph(const LabeledDataset& dataset, LipschitzBudget L) {
    ConstraintGraph g;
    g.n = dataset.n();
    g.lipschitz = L.value();
    g.edges.reserve(static_cast<size_t>(g.n) * (g.n - 1) / 2);
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            g.edges.push_back(make_edge(dataset, L.value(), i, j));
    return g;
}

ConstraintGraph knn_graph(const LabeledDataset& dataset, LipschitzBudget L, int k) {
    const int n = dataset.n();
    if (k < 1 || k >= n)
        throw ValidationError("knn_graph requires 1 <= k < n, got k=" + std::to_string(k) +
                              ", n=" + std::to_string(n));

    std::set<std::pair<int, int>> pairs;
    std::vector<std::pair<double, int>> dists(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            dists[static_cast<size_t>(j)] = {j == i ? std::numeric_limits<double>::infinity()
                                                    : (dataset.inputs.row(i) - dataset.inputs.row(j)).norm(),
                                             j};
        // ties broken deterministically toward the smaller index
        std::sort(dists.begin(), dists.end());
        for (int r = 0; r < k; ++r) {
            int j = dists[static_cast<size_t>(r)].second;
            pairs.emplace(std::min(i, j), std::max(i, j));
        }
    }
    for (auto [i, j] : euclidean_mst(dataset)) pairs.emplace(i, j);

    ConstraintGraph g;
    g.n = n;
    g.lipschitz = L.value();
    for (auto [i, j] : pairs) g.edges.push_back(make_edge(dataset, L.value(), i, j));
    sort_edges(g.edges);
    return g;
}

ConstraintGraph greedy_spanner(const LabeledDataset& dataset, LipschitzBudget L, double stretch) {
    if (!(stretch > 1.0))
        throw ValidationError("spanner stretch must exceed 1");
    const int n = dataset.n();

    struct Pair {
        double dist;
        int i, j;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            pairs.push_back({(dataset.inputs.row(i) - dataset.inputs.row(j)).norm(), i, j});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });

    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<size_t>(n));
    auto graph_dist = [&](int s, int t) {
        std::vector<double> dist(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        dist[static_cast<size_t>(s)] = 0.0;
        heap.emplace(0.0, s);
        while (!heap.empty()) {
            auto [du, u] = heap.top();
            heap.pop();
            if (du > dist[static_cast<size_t>(u)]) continue;
            if (u == t) return du;
            for (auto [v, w] : adj[static_cast<size_t>(u)])
                if (du + w < dist[static_cast<size_t>(v)]) {
                    dist[static_cast<size_t>(v)] = du + w;
                    heap.emplace(du + w, v);
                }
        }
        return dist[static_cast<size_t>(t)];
    };

    ConstraintGraph g;
    g.n = n;
    g.lipschitz = L.value();
    for (const auto& p : pairs) {
        if (graph_dist(p.i, p.j) > stretch * p.dist) {
            g.edges.push_back(make_edge(dataset, L.value(), p.i, p.j));
            adj[static_cast<size_t>(p.i)].emplace_back(p.j, p.dist);
            adj[static_cast<size_t>(p.j)].emplace_back(p.i, p.dist);
        }
    }
    sort_edges(g.edges);
    return g;
}

ConstraintGraph GraphPolicy::build(const LabeledDataset& dataset, LipschitzBudget L) const {
    switch (kind) {
    case Kind::Complete:
        return complete_graph(dataset, L);
    case Kind::Knn:
        // saturate k for tiny datasets so small CV folds stay valid
        if (dataset.n() < 2) return complete_graph(dataset, L);
        return knn_graph(dataset, L, std::min(k, dataset.n() - 1));
    case Kind::Spanner:
        return greedy_spanner(dataset, L, 1.0 + spanner_eps);
    }
    throw ValidationError("unknown graph policy");
}

std::string GraphPolicy::to_string() const {
    switch (kind) {
    case Kind::Complete:
        return "complete";
    case Kind::Knn:
        return "knn:" + std::to_string(k);
    case Kind::Spanner: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "spanner:%g", spanner_eps);
        return buf;
    }
    }
    return "?";
}

GraphPolicy GraphPolicy::parse(const std::string& text) {
    GraphPolicy p;
    if (text == "complete") {
        p.kind = Kind::Complete;
        return p;
    }
    auto colon = text.find(':');
    std::string head = text.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
        if (head == "knn") {
            p.kind = Kind::Knn;
            p.k = std::stoi(arg);
            if (p.k < 1) throw std::invalid_argument("k");
            return p;
        }
        if (head == "spanner") {
            p.kind = Kind::Spanner;
            p.spanner_eps = std::stod(arg);
            if (!(p.spanner_eps > 0)) throw std::invalid_argument("eps");
            return p;
        }
    } catch (const std::exception&) {
        throw ValidationError("bad graph policy argument in '" + text + "'");
    }
    throw ValidationError("unknown graph policy '" + text +
                          "' (expected complete | knn:<k> | spanner:<eps>)");
}

} // namespace lipreg
