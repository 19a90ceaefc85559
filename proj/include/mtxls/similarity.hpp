#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mtxls/candidate.hpp"
#include "mtxls/embedding.hpp"
#include "mtxls/errors.hpp"

namespace mtxls {

// Pluggable pairwise similarity. The default scores the candidates'
// embeddings; the table backend lets tests and callers realize an arbitrary
// phi matrix (any bounded MT quality-estimation score, pre-scaled to [0,1]).
class SimilarityBackend {
public:
    virtual ~SimilarityBackend() = default;
    virtual double pair_phi(const Candidate& a, const Candidate& b) const = 0;
};

class CosineSimilarity final : public SimilarityBackend {
public:
    double pair_phi(const Candidate& a, const Candidate& b) const override {
        return phi(a.embedding, b.embedding);
    }
};

inline const SimilarityBackend& cosine_similarity() {
    static const CosineSimilarity instance;
    return instance;
}

// Dense precomputed table keyed by candidate-id pair. Callers are
// responsible for pre-scaling scores into [0,1]; out-of-range entries are
// rejected here rather than silently rescaled.
class PhiTable final : public SimilarityBackend {
public:
    void set(const std::string& id_a, const std::string& id_b, double value) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw InvalidInputError("phi table: value " + std::to_string(value) +
                                    " for (" + id_a + ", " + id_b +
                                    ") outside [0,1]");
        }
        table_[key(id_a, id_b)] = value;
    }

    double pair_phi(const Candidate& a, const Candidate& b) const override {
        auto it = table_.find(key(a.id, b.id));
        if (it == table_.end()) {
            throw InvalidInputError("phi table: no entry for (" + a.id + ", " +
                                    b.id + ")");
        }
        return it->second;
    }

private:
    static std::pair<std::string, std::string> key(const std::string& a,
                                                   const std::string& b) {
        return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
    }

    std::map<std::pair<std::string, std::string>, double> table_;
};

// Mean pairwise similarity over all unordered member pairs, iterated in
// sorted-language order.
inline double set_similarity(const SummarySet& set,
                             const SimilarityBackend& backend = cosine_similarity()) {
    const std::size_t n = set.size();
    if (n < 2) {
        throw InvalidInputError("set similarity: needs at least 2 members, got " +
                                std::to_string(n));
    }
    double sum = 0.0;
    for (auto i = set.members.begin(); i != set.members.end(); ++i) {
        for (auto j = std::next(i); j != set.members.end(); ++j) {
            sum += backend.pair_phi(i->second, j->second);
        }
    }
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return sum / pairs;
}

// Mean similarity along adjacent pairs of the given language ordering.
inline double chain_similarity(const SummarySet& set, const Permutation& sigma,
                               const SimilarityBackend& backend = cosine_similarity()) {
    sigma.validate_against(set.languages());
    const std::size_t n = sigma.order.size();
    if (n < 2) {
        throw InvalidInputError("chain similarity: needs at least 2 members");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        sum += backend.pair_phi(set.at(sigma.order[i]), set.at(sigma.order[i + 1]));
    }
    return sum / static_cast<double>(n - 1);
}

}  // namespace mtxls
