#pragma once

// Builders and independent oracles shared by the test suites. Oracles here
// deliberately avoid the library's memoized/DP paths: scores are recomputed
// with plain loops so the suites check the optimized code against a second
// implementation, not against itself.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mtxls/candidate.hpp"
#include "mtxls/embedding.hpp"
#include "mtxls/pool.hpp"
#include "mtxls/random.hpp"
#include "mtxls/similarity.hpp"

namespace testutil {

using mtxls::Candidate;
using mtxls::CandidatePool;
using mtxls::Embedding;
using mtxls::Permutation;
using mtxls::SimilarityBackend;
using mtxls::SummarySet;

inline Candidate cand(std::string id, std::string lang, std::vector<double> raw,
                      std::string text = "") {
    Candidate c;
    c.id = std::move(id);
    c.language = std::move(lang);
    c.text = text.empty() ? c.id : std::move(text);
    c.embedding = Embedding(std::move(raw));
    return c;
}

// Pool with ids "<lang>_<index>" from raw (pre-normalization) vectors.
inline CandidatePool pool_from(
    const std::string& cluster_id,
    const std::vector<std::pair<std::string, std::vector<std::vector<double>>>>&
        lists) {
    CandidatePool pool;
    pool.cluster_id = cluster_id;
    for (const auto& [lang, vectors] : lists) {
        pool.languages.push_back(lang);
        auto& out = pool.candidates[lang];
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            out.push_back(cand(lang + "_" + std::to_string(i), lang, vectors[i]));
        }
    }
    return pool;
}

inline CandidatePool random_pool(std::size_t n_languages, std::size_t k,
                                 std::size_t dimension, std::uint64_t seed) {
    mtxls::Rng rng(seed);
    std::vector<std::pair<std::string, std::vector<std::vector<double>>>> lists;
    for (std::size_t li = 0; li < n_languages; ++li) {
        std::string lang(1, static_cast<char>('a' + li));
        std::vector<std::vector<double>> vectors(k);
        for (auto& v : vectors) {
            v.resize(dimension);
            for (double& x : v) x = mtxls::standard_normal(rng);
        }
        lists.emplace_back(std::move(lang), std::move(vectors));
    }
    return pool_from("pool_" + std::to_string(seed), lists);
}

// Three unit vectors whose pairwise phis are 0.9, 0.8, 0.7 (dots 0.8, 0.6,
// 0.4): v1.v2 = 0.8, v1.v3 = 0.4, v2.v3 = 0.6.
inline std::vector<std::vector<double>> phi_triplet_vectors() {
    const double y3 = (0.6 - 0.8 * 0.4) / 0.6;
    const double z3 = std::sqrt(1.0 - 0.4 * 0.4 - y3 * y3);
    return {{1.0, 0.0, 0.0}, {0.8, 0.6, 0.0}, {0.4, y3, z3}};
}

// Every index vector over the given per-position sizes, in lexicographic
// order (first position most significant).
inline std::vector<std::vector<std::size_t>> all_index_vectors(
    const std::vector<std::size_t>& sizes) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> current(sizes.size(), 0);
    while (true) {
        out.push_back(current);
        std::size_t pos = sizes.size();
        while (pos-- > 0) {
            if (++current[pos] < sizes[pos]) break;
            current[pos] = 0;
            if (pos == 0) return out;
        }
    }
}

inline const Candidate& pick(const CandidatePool& pool, std::size_t lang_pos,
                             std::size_t cand_idx) {
    return pool.list(pool.languages[lang_pos]).at(cand_idx);
}

// Mean pairwise phi of the choice (indices by declared language position),
// computed with direct loops over sorted language order.
inline double oracle_set_phi(const CandidatePool& pool,
                             const std::vector<std::size_t>& choice,
                             const SimilarityBackend& backend) {
    std::vector<std::size_t> order(pool.languages.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pool.languages[a] < pool.languages[b];
    });
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            sum += backend.pair_phi(pick(pool, order[i], choice[order[i]]),
                                    pick(pool, order[j], choice[order[j]]));
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

// Mean adjacent-pair phi along sigma for the choice (indices by declared
// language position).
inline double oracle_chain_phi(const CandidatePool& pool, const Permutation& sigma,
                               const std::vector<std::size_t>& choice,
                               const SimilarityBackend& backend) {
    auto position = [&](const std::string& lang) {
        for (std::size_t i = 0; i < pool.languages.size(); ++i) {
            if (pool.languages[i] == lang) return i;
        }
        throw std::runtime_error("oracle: unknown language " + lang);
    };
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < sigma.order.size(); ++i) {
        const std::size_t a = position(sigma.order[i]);
        const std::size_t b = position(sigma.order[i + 1]);
        sum += backend.pair_phi(pick(pool, a, choice[a]), pick(pool, b, choice[b]));
    }
    return sum / static_cast<double>(sigma.order.size() - 1);
}

struct BruteResult {
    std::vector<std::size_t> choice;  // by declared language position
    double score = 0.0;
};

// Argmax of set phi over every combination; ties keep the lexicographically
// smallest index vector in declared order.
inline BruteResult brute_exhaustive(const CandidatePool& pool,
                                    const SimilarityBackend& backend) {
    std::vector<std::size_t> sizes;
    for (const auto& lang : pool.languages) sizes.push_back(pool.list(lang).size());
    BruteResult best;
    best.score = -1.0;
    for (const auto& choice : all_index_vectors(sizes)) {
        const double score = oracle_set_phi(pool, choice, backend);
        if (score > best.score) {
            best.score = score;
            best.choice = choice;
        }
    }
    return best;
}

// Argmax of chain phi along sigma over every combination; ties keep the
// lexicographically smallest index sequence ALONG SIGMA.
inline BruteResult brute_chain(const CandidatePool& pool, const Permutation& sigma,
                               const SimilarityBackend& backend) {
    std::vector<std::size_t> position(sigma.order.size());
    for (std::size_t s = 0; s < sigma.order.size(); ++s) {
        for (std::size_t i = 0; i < pool.languages.size(); ++i) {
            if (pool.languages[i] == sigma.order[s]) position[s] = i;
        }
    }
    std::vector<std::size_t> sizes;
    for (std::size_t s = 0; s < sigma.order.size(); ++s) {
        sizes.push_back(pool.list(sigma.order[s]).size());
    }
    BruteResult best;
    best.score = -1.0;
    for (const auto& along : all_index_vectors(sizes)) {
        std::vector<std::size_t> choice(pool.languages.size());
        for (std::size_t s = 0; s < along.size(); ++s) {
            choice[position[s]] = along[s];
        }
        const double score = oracle_chain_phi(pool, sigma, choice, backend);
        if (score > best.score) {
            best.score = score;
            best.choice = choice;
        }
    }
    return best;
}

inline std::vector<std::string> set_ids(const SummarySet& set) {
    std::vector<std::string> ids;
    for (const auto& [lang, member] : set.members) ids.push_back(member.id);
    return ids;
}

inline std::vector<std::string> choice_ids(const CandidatePool& pool,
                                           const std::vector<std::size_t>& choice) {
    std::vector<std::string> ids;
    std::vector<std::string> sorted = pool.languages;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& lang : sorted) {
        for (std::size_t i = 0; i < pool.languages.size(); ++i) {
            if (pool.languages[i] == lang) {
                ids.push_back(pool.list(lang).at(choice[i]).id);
            }
        }
    }
    return ids;
}

// Maximal cliques of size >= 2 by subset enumeration (<= 20 nodes), as
// sorted node-index sets ordered by (size desc, members asc).
inline std::vector<std::vector<std::size_t>> brute_max_cliques(
    std::size_t n, const std::set<std::pair<std::size_t, std::size_t>>& edges) {
    auto connected = [&](std::size_t a, std::size_t b) {
        return edges.count({std::min(a, b), std::max(a, b)}) > 0;
    };
    std::vector<std::uint32_t> cliques;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) members.push_back(i);
        }
        if (members.size() < 2) continue;
        bool complete = true;
        for (std::size_t i = 0; i < members.size() && complete; ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                if (!connected(members[i], members[j])) {
                    complete = false;
                    break;
                }
            }
        }
        if (!complete) continue;
        bool maximal = true;
        for (std::size_t v = 0; v < n; ++v) {
            if (mask & (1u << v)) continue;
            bool extends = true;
            for (std::size_t u : members) {
                if (!connected(u, v)) {
                    extends = false;
                    break;
                }
            }
            if (extends) {
                maximal = false;
                break;
            }
        }
        if (maximal) cliques.push_back(mask);
    }
    std::vector<std::vector<std::size_t>> out;
    for (std::uint32_t mask : cliques) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) members.push_back(i);
        }
        out.push_back(std::move(members));
    }
    std::sort(out.begin(), out.end(),
              [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
                  if (a.size() != b.size()) return a.size() > b.size();
                  return a < b;
              });
    return out;
}

struct RougeFixture {
    const char* candidate;
    const char* reference;
    const char* language;
    double expected;
};

// Worked by hand: bigram multisets, clipped overlap, F1 = 2PR/(P+R).
inline const std::vector<RougeFixture>& rouge_fixtures() {
    static const std::vector<RougeFixture> fixtures = {
        {"a b c d", "a b c d", "en", 1.0},
        {"a b c", "b c d", "en", 0.5},
        {"a", "a b c", "en", 0.0},
        {"a b c", "z", "en", 0.0},
        {"", "", "en", 0.0},
        {"", "a b", "en", 0.0},
        {"a b", "", "en", 0.0},
        {"a b c d", "x y z w", "en", 0.0},
        // cand bigrams {ab, ba, ab}; ref {ab}; overlap 1; P=1/3, R=1 -> 0.5.
        {"a b a b", "a b", "en", 0.5},
        // cand {ab, bc, cd}; ref {ab, bx}; overlap 1; P=1/3, R=1/2 -> 0.4.
        {"a b c d", "a b x", "en", 0.4},
        // Case folding and punctuation: both sides tokenize to (the, cat, sat).
        {"The cat sat.", "the CAT sat", "en", 1.0},
        // cand {ab,bc,ca,ab}: ab x2, bc, ca; ref {ab,bc,cb}: overlap ab 1 + bc 1
        // = 2; P=2/4, R=2/3 -> 2*(1/2)*(2/3)/(1/2+2/3) = 4/7.
        {"a b c a b", "a b c b", "en", 4.0 / 7.0},
        // Repeated bigram clipping: cand {aa,aa,aa}, ref {aa}; overlap 1;
        // P=1/3, R=1 -> 0.5.
        {"a a a a", "a a", "en", 0.5},
        // zh per-character: cand tokens (你,好,吗) bigrams {你好, 好吗};
        // ref (你,好) bigram {你好}; overlap 1; P=1/2, R=1 -> 2/3.
        {"你好吗", "你好", "zh", 2.0 / 3.0},
        {"你好世界", "你好世界", "zh", 1.0},
        // zh punctuation removal: 你好，世界 -> (你,好,世,界), same as
        // unpunctuated.
        {"你好，世界", "你好世界", "zh", 1.0},
        // Accent-sensitive tokens differ: bigrams (école, est) vs (ecole, est).
        {"école est", "ecole est", "fr", 0.0},
        // Hyphen split makes the sides identical.
        {"state-of-the-art", "state of the art", "en", 1.0},
        // cand (a,b,c,d,e): {ab,bc,cd,de}; ref (b,c,d): {bc,cd}; overlap 2;
        // P=2/4, R=2/2 -> 2*(1/2)*1/(3/2) = 2/3.
        {"a b c d e", "b c d", "en", 2.0 / 3.0},
        // Cyrillic with folding: (москва, это, столица) on both sides.
        {"МОСКВА это столица", "москва ЭТО столица", "ru", 1.0},
    };
    return fixtures;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace testutil
