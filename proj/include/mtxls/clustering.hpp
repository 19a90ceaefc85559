#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mtxls/errors.hpp"
#include "mtxls/random.hpp"

namespace mtxls {

struct DocumentNode {
    std::string doc_id;
    std::string language;
    std::string summary_ref;
};

// Undirected graph of cross-language document pairings. Only documents in
// different languages may be adjacent; the constraint is enforced at edge
// insertion so every held graph is valid.
class PairingGraph {
public:
    void add_document(DocumentNode node) {
        if (node.doc_id.empty()) {
            throw InvalidInputError("document id must be non-empty");
        }
        if (node.language.empty()) {
            throw InvalidInputError("document '" + node.doc_id +
                                    "' has an empty language tag");
        }
        if (!index_.emplace(node.doc_id, nodes_.size()).second) {
            throw InvalidInputError("duplicate document id '" + node.doc_id + "'");
        }
        nodes_.push_back(std::move(node));
        adjacency_.emplace_back();
    }

    void add_pairing(const std::string& a, const std::string& b) {
        const std::size_t ia = require(a);
        const std::size_t ib = require(b);
        if (ia == ib) {
            throw InvalidInputError("pairing of '" + a + "' with itself");
        }
        if (nodes_[ia].language == nodes_[ib].language) {
            throw InvalidInputError("pairing between '" + a + "' and '" + b +
                                    "' links two '" + nodes_[ia].language +
                                    "' documents");
        }
        adjacency_[ia].insert(ib);
        adjacency_[ib].insert(ia);
    }

    bool has_document(const std::string& doc_id) const {
        return index_.count(doc_id) != 0;
    }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<DocumentNode>& nodes() const { return nodes_; }
    const std::set<std::size_t>& neighbors(std::size_t node) const {
        return adjacency_[node];
    }
    std::size_t edge_count() const {
        std::size_t twice = 0;
        for (const auto& adj : adjacency_) twice += adj.size();
        return twice / 2;
    }

private:
    std::size_t require(const std::string& doc_id) const {
        const auto it = index_.find(doc_id);
        if (it == index_.end()) {
            throw InvalidInputError("pairing references unknown document '" +
                                    doc_id + "'");
        }
        return it->second;
    }

    std::vector<DocumentNode> nodes_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::set<std::size_t>> adjacency_;
};

struct Cluster {
    std::string cluster_id;
    std::map<std::string, DocumentNode> members;  // language -> document

    std::size_t size() const { return members.size(); }
};

namespace detail {

inline std::string clique_hash_id(const std::vector<std::string>& sorted_doc_ids) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const auto& id : sorted_doc_ids) {
        hash = fnv1a64(id, hash);
        hash ^= 0x1f;
        hash *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
        hash >>= 4;
    }
    return out;
}

// Smallest-last vertex ordering; processing vertices in this order bounds the
// candidate set of each outer Bron-Kerbosch call by the graph degeneracy.
inline std::vector<std::size_t> degeneracy_order(const PairingGraph& graph) {
    const std::size_t n = graph.size();
    std::vector<std::size_t> degree(n);
    std::vector<bool> removed(n, false);
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t v = 0; v < n; ++v) degree[v] = graph.neighbors(v).size();
    for (std::size_t round = 0; round < n; ++round) {
        std::size_t best = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (!removed[v] && (best == n || degree[v] < degree[best])) best = v;
        }
        removed[best] = true;
        order.push_back(best);
        for (std::size_t u : graph.neighbors(best)) {
            if (!removed[u]) --degree[u];
        }
    }
    return order;
}

inline void bron_kerbosch_pivot(const PairingGraph& graph, std::vector<std::size_t>& R,
                                std::vector<std::size_t> P, std::vector<std::size_t> X,
                                std::vector<std::vector<std::size_t>>& out) {
    if (P.empty() && X.empty()) {
        if (R.size() >= 2) out.push_back(R);
        return;
    }
    std::size_t pivot = 0;
    std::size_t best_cover = 0;
    bool have_pivot = false;
    for (const auto& pool : {P, X}) {
        for (std::size_t u : pool) {
            std::size_t cover = 0;
            const auto& adj = graph.neighbors(u);
            for (std::size_t v : P) {
                if (adj.count(v)) ++cover;
            }
            if (!have_pivot || cover > best_cover) {
                have_pivot = true;
                best_cover = cover;
                pivot = u;
            }
        }
    }
    const auto& pivot_adj = graph.neighbors(pivot);
    std::vector<std::size_t> frontier;
    for (std::size_t v : P) {
        if (!pivot_adj.count(v)) frontier.push_back(v);
    }
    for (std::size_t v : frontier) {
        const auto& adj = graph.neighbors(v);
        std::vector<std::size_t> P2;
        std::vector<std::size_t> X2;
        for (std::size_t u : P) {
            if (adj.count(u)) P2.push_back(u);
        }
        for (std::size_t u : X) {
            if (adj.count(u)) X2.push_back(u);
        }
        R.push_back(v);
        bron_kerbosch_pivot(graph, R, std::move(P2), std::move(X2), out);
        R.pop_back();
        P.erase(std::find(P.begin(), P.end(), v));
        X.push_back(v);
    }
}

}  // namespace detail

// Every maximal clique of size >= 2, one Cluster each, ordered by size
// descending then by the sorted member id sequence. Documents may appear in
// several clusters; overlaps are preserved.
inline std::vector<Cluster> build_clusters(const PairingGraph& graph) {
    const std::vector<std::size_t> order = detail::degeneracy_order(graph);
    std::vector<std::size_t> rank(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;

    std::vector<std::vector<std::size_t>> cliques;
    std::vector<std::size_t> R;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::size_t v = order[i];
        std::vector<std::size_t> P;
        std::vector<std::size_t> X;
        for (std::size_t u : graph.neighbors(v)) {
            (rank[u] > i ? P : X).push_back(u);
        }
        R.assign(1, v);
        detail::bron_kerbosch_pivot(graph, R, std::move(P), std::move(X), cliques);
    }

    std::vector<Cluster> clusters;
    clusters.reserve(cliques.size());
    std::vector<std::pair<std::vector<std::string>, std::size_t>> keys;
    keys.reserve(cliques.size());
    for (std::size_t c = 0; c < cliques.size(); ++c) {
        std::vector<std::string> ids;
        ids.reserve(cliques[c].size());
        for (std::size_t v : cliques[c]) ids.push_back(graph.nodes()[v].doc_id);
        std::sort(ids.begin(), ids.end());
        keys.emplace_back(std::move(ids), c);
    }
    std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
        if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
        return a.first < b.first;
    });
    for (const auto& [ids, c] : keys) {
        Cluster cluster;
        cluster.cluster_id = detail::clique_hash_id(ids);
        for (std::size_t v : cliques[c]) {
            const DocumentNode& node = graph.nodes()[v];
            cluster.members.emplace(node.language, node);
        }
        clusters.push_back(std::move(cluster));
    }
    return clusters;
}

// Counting convention: every (cluster, member) incidence counts once, so a
// document belonging to several clusters contributes to each; distinct
// documents are reported separately.
struct StatsReport {
    std::map<std::size_t, std::size_t> size_histogram;
    std::map<std::string, std::map<std::size_t, std::size_t>> per_language;
    std::map<std::pair<std::string, std::string>, std::size_t> language_pairs;
    std::size_t total_clusters = 0;
    std::size_t total_incidences = 0;
    std::size_t distinct_documents = 0;
};

inline StatsReport cluster_stats(const std::vector<Cluster>& clusters) {
    StatsReport report;
    std::set<std::string> seen_docs;
    report.total_clusters = clusters.size();
    for (const Cluster& cluster : clusters) {
        const std::size_t size = cluster.size();
        ++report.size_histogram[size];
        for (const auto& [lang, node] : cluster.members) {
            ++report.per_language[lang][size];
            ++report.total_incidences;
            seen_docs.insert(node.doc_id);
        }
        for (auto it = cluster.members.begin(); it != cluster.members.end(); ++it) {
            for (auto jt = std::next(it); jt != cluster.members.end(); ++jt) {
                ++report.language_pairs[{it->first, jt->first}];
            }
        }
    }
    report.distinct_documents = seen_docs.size();
    return report;
}

}  // namespace mtxls
