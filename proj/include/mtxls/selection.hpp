#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mtxls/candidate.hpp"
#include "mtxls/errors.hpp"
#include "mtxls/pool.hpp"
#include "mtxls/random.hpp"
#include "mtxls/similarity.hpp"

namespace mtxls {

enum class SelectionMethod { Top1, Pivot, Neutral, Exhaustive, Rejection };

inline const char* to_string(SelectionMethod method) {
    switch (method) {
        case SelectionMethod::Top1: return "top1";
        case SelectionMethod::Pivot: return "pivot";
        case SelectionMethod::Neutral: return "neutral";
        case SelectionMethod::Exhaustive: return "exhaustive";
        case SelectionMethod::Rejection: return "rejection";
    }
    return "unknown";
}

inline SelectionMethod selection_method_from_string(const std::string& name) {
    if (name == "top1") return SelectionMethod::Top1;
    if (name == "pivot") return SelectionMethod::Pivot;
    if (name == "neutral") return SelectionMethod::Neutral;
    if (name == "exhaustive") return SelectionMethod::Exhaustive;
    if (name == "rejection") return SelectionMethod::Rejection;
    throw InvalidInputError("unknown selection method '" + name + "'");
}

// Lazily memoized pairwise phi over one pool, shared across the permutations
// of a single selection call. Slots are atomic so concurrent chain searches
// may race on duplicate computations; phi is pure, so every writer stores
// the same value.
class PhiMemo {
public:
    PhiMemo(const CandidatePool& pool,
            const SimilarityBackend& backend = cosine_similarity())
        : pool_(&pool), backend_(&backend) {
        offsets_.reserve(pool.languages.size());
        for (const auto& lang : pool.languages) {
            offsets_.push_back(flat_.size());
            for (const auto& cand : pool.list(lang)) {
                flat_.push_back(&cand);
            }
        }
        sorted_positions_.resize(pool.languages.size());
        std::iota(sorted_positions_.begin(), sorted_positions_.end(), std::size_t{0});
        std::sort(sorted_positions_.begin(), sorted_positions_.end(),
                  [&](std::size_t a, std::size_t b) {
                      return pool.languages[a] < pool.languages[b];
                  });
        const std::size_t total = flat_.size();
        pair_slots_ = total * (total - 1) / 2;
        cache_ = std::make_unique<std::atomic<double>[]>(pair_slots_);
        for (std::size_t i = 0; i < pair_slots_; ++i) {
            cache_[i].store(std::numeric_limits<double>::quiet_NaN(),
                            std::memory_order_relaxed);
        }
    }

    const CandidatePool& pool() const { return *pool_; }
    const SimilarityBackend& backend() const { return *backend_; }

    std::size_t language_count() const { return offsets_.size(); }
    std::size_t list_size(std::size_t lang_pos) const {
        const std::size_t end = lang_pos + 1 < offsets_.size() ? offsets_[lang_pos + 1]
                                                               : flat_.size();
        return end - offsets_[lang_pos];
    }

    const Candidate& candidate(std::size_t lang_pos, std::size_t cand_index) const {
        return *flat_[offsets_[lang_pos] + cand_index];
    }

    double pair_score(std::size_t global_a, std::size_t global_b) {
        if (global_a > global_b) std::swap(global_a, global_b);
        const std::size_t slot = global_b * (global_b - 1) / 2 + global_a;
        double value = cache_[slot].load(std::memory_order_relaxed);
        if (std::isnan(value)) {
            value = backend_->pair_phi(*flat_[global_a], *flat_[global_b]);
            cache_[slot].store(value, std::memory_order_relaxed);
        }
        return value;
    }

    double pair_score(std::size_t lang_a, std::size_t cand_a, std::size_t lang_b,
                      std::size_t cand_b) {
        return pair_score(offsets_[lang_a] + cand_a, offsets_[lang_b] + cand_b);
    }

    // Mean pairwise phi of the set picked by `choice` (one candidate index per
    // declared-language position). Pairs are visited in sorted-language order,
    // so the result is bit-identical to set_similarity() on the same members.
    double set_score(const std::vector<std::size_t>& choice) {
        const std::size_t n = sorted_positions_.size();
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const std::size_t la = sorted_positions_[i];
                const std::size_t lb = sorted_positions_[j];
                sum += pair_score(la, choice[la], lb, choice[lb]);
            }
        }
        return sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
    }

    SummarySet assemble(const std::vector<std::size_t>& choice) const {
        SummarySet set;
        for (std::size_t li = 0; li < offsets_.size(); ++li) {
            set.insert(candidate(li, choice[li]));
        }
        return set;
    }

private:
    const CandidatePool* pool_;
    const SimilarityBackend* backend_;
    std::vector<const Candidate*> flat_;
    std::vector<std::size_t> offsets_;          // global index of each language's first candidate
    std::vector<std::size_t> sorted_positions_; // language positions ordered by tag
    std::size_t pair_slots_ = 0;
    std::unique_ptr<std::atomic<double>[]> cache_;
};

// Layered DAG for one language permutation: one layer of k nodes per
// language plus implicit source/sink, edges between consecutive layers only,
// weight 1 - phi. All weights lie in [0,1]; source and sink edges weigh 0.
struct LayeredGraph {
    Permutation order;
    std::vector<std::size_t> layer_positions;  // declared-language position per layer
    std::vector<std::size_t> layer_sizes;
    std::vector<std::vector<double>> weights;  // weights[l][i * layer_sizes[l+1] + j]

    std::size_t node_count() const {
        std::size_t total = 2;
        for (std::size_t k : layer_sizes) total += k;
        return total;
    }
};

inline LayeredGraph build_layered_graph(const CandidatePool& pool,
                                        const Permutation& sigma, PhiMemo& memo) {
    sigma.validate_against(pool.languages);
    LayeredGraph graph;
    graph.order = sigma;
    const std::size_t n = sigma.order.size();
    graph.layer_positions.reserve(n);
    for (const auto& lang : sigma.order) {
        const auto it = std::find(pool.languages.begin(), pool.languages.end(), lang);
        graph.layer_positions.push_back(
            static_cast<std::size_t>(it - pool.languages.begin()));
    }
    graph.layer_sizes.reserve(n);
    for (std::size_t pos : graph.layer_positions) {
        graph.layer_sizes.push_back(memo.list_size(pos));
    }
    graph.weights.resize(n - 1);
    for (std::size_t l = 0; l + 1 < n; ++l) {
        const std::size_t ka = graph.layer_sizes[l];
        const std::size_t kb = graph.layer_sizes[l + 1];
        auto& w = graph.weights[l];
        w.resize(ka * kb);
        for (std::size_t i = 0; i < ka; ++i) {
            for (std::size_t j = 0; j < kb; ++j) {
                w[i * kb + j] = 1.0 - memo.pair_score(graph.layer_positions[l], i,
                                                      graph.layer_positions[l + 1], j);
            }
        }
    }
    return graph;
}

struct ChainResult {
    Permutation sigma;
    std::vector<std::size_t> layer_positions;  // declared-language position per layer
    std::vector<std::size_t> choice;  // candidate index per declared-language position
    std::vector<std::size_t> indices_along_sigma;
    double path_cost = 0.0;           // minimum source-to-sink weight
    double chain_score = 0.0;         // chain similarity of the chosen set
};

// Minimum-weight source-to-sink path by topological DP over the layered DAG:
// O(N k^2) time, O(N k) space. Suffix costs are computed back-to-front and the
// path is rebuilt front-to-back picking the smallest candidate index at every
// exact tie, which yields the lexicographically smallest index sequence along
// sigma among all minimum-cost paths.
inline ChainResult chain_best_detail(const CandidatePool& pool,
                                     const Permutation& sigma, PhiMemo& memo) {
    const LayeredGraph graph = build_layered_graph(pool, sigma, memo);
    const std::size_t n = graph.layer_sizes.size();

    std::vector<std::vector<double>> cost_from(n);
    cost_from[n - 1].assign(graph.layer_sizes[n - 1], 0.0);
    for (std::size_t l = n - 1; l-- > 0;) {
        const std::size_t ka = graph.layer_sizes[l];
        const std::size_t kb = graph.layer_sizes[l + 1];
        cost_from[l].resize(ka);
        for (std::size_t i = 0; i < ka; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < kb; ++j) {
                const double c = graph.weights[l][i * kb + j] + cost_from[l + 1][j];
                if (c < best) best = c;
            }
            cost_from[l][i] = best;
        }
    }

    ChainResult result;
    result.sigma = sigma;
    result.layer_positions = graph.layer_positions;
    result.indices_along_sigma.resize(n);

    double total = std::numeric_limits<double>::infinity();
    std::size_t first = 0;
    for (std::size_t i = 0; i < graph.layer_sizes[0]; ++i) {
        if (cost_from[0][i] < total) {
            total = cost_from[0][i];
            first = i;
        }
    }
    result.path_cost = total;
    result.indices_along_sigma[0] = first;
    for (std::size_t l = 0; l + 1 < n; ++l) {
        const std::size_t kb = graph.layer_sizes[l + 1];
        const std::size_t i = result.indices_along_sigma[l];
        for (std::size_t j = 0; j < kb; ++j) {
            if (graph.weights[l][i * kb + j] + cost_from[l + 1][j] == cost_from[l][i]) {
                result.indices_along_sigma[l + 1] = j;
                break;
            }
        }
    }

    result.choice.resize(n);
    double phi_sum = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        result.choice[graph.layer_positions[l]] = result.indices_along_sigma[l];
        if (l + 1 < n) {
            phi_sum += memo.pair_score(graph.layer_positions[l],
                                       result.indices_along_sigma[l],
                                       graph.layer_positions[l + 1],
                                       result.indices_along_sigma[l + 1]);
        }
    }
    result.chain_score = phi_sum / static_cast<double>(n - 1);
    return result;
}

// The set maximizing chain similarity along sigma.
inline SummarySet chain_best(const CandidatePool& pool, const Permutation& sigma,
                             const SimilarityBackend& backend = cosine_similarity()) {
    pool.validate();
    PhiMemo memo(pool, backend);
    return memo.assemble(chain_best_detail(pool, sigma, memo).choice);
}

struct PermutationOutcome {
    Permutation sigma;
    std::vector<std::string> chosen_ids;  // in sigma order
    double phi_bar = 0.0;
};

struct SelectionReport {
    SelectionMethod method = SelectionMethod::Top1;
    SummarySet chosen;
    double score = 0.0;
    std::vector<PermutationOutcome> per_permutation;
    std::uint64_t seed = 0;
    double elapsed_ms = 0.0;
};

// Index-0 candidate of every language (lists come best-first upstream).
inline SummarySet select_top1(const CandidatePool& pool) {
    pool.validate();
    SummarySet set;
    for (const auto& lang : pool.languages) {
        set.insert(pool.list(lang).front());
    }
    return set;
}

// Per-language argmax of phi against a fixed pivot summary. The pivot's own
// language, when present, is occupied by the pivot itself. Ties go to the
// lowest candidate index.
inline SummarySet select_pivot(const CandidatePool& pool, const Candidate& pivot,
                               const SimilarityBackend& backend = cosine_similarity()) {
    pool.validate();
    if (pivot.embedding.empty()) {
        throw InvalidInputError("pivot candidate '" + pivot.id +
                                "' has no embedding");
    }
    SummarySet set;
    for (const auto& lang : pool.languages) {
        if (lang == pivot.language) {
            set.insert(pivot);
            continue;
        }
        const auto& list = pool.list(lang);
        std::size_t best = 0;
        double best_phi = -1.0;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const double score = backend.pair_phi(list[i], pivot);
            if (score > best_phi) {
                best_phi = score;
                best = i;
            }
        }
        set.insert(list[best]);
    }
    return set;
}

namespace detail {

// Permutation draw order for a given seed. Below the enumeration cap the full
// permutation set is shuffled once and consumed as a prefix (sampling without
// replacement, m truncated to N!); above it, independent shuffles are drawn
// sequentially. Both schemes give nested prefixes for growing m under a fixed
// seed.
inline std::vector<Permutation> draw_permutations(
    std::vector<std::string> sorted_langs, std::size_t m, std::uint64_t seed,
    std::size_t enumeration_cap = 5040) {
    Rng rng(seed);
    std::size_t factorial = 1;
    bool enumerable = true;
    for (std::size_t i = 2; i <= sorted_langs.size(); ++i) {
        factorial *= i;
        if (factorial > enumeration_cap) {
            enumerable = false;
            break;
        }
    }
    std::vector<Permutation> draws;
    if (enumerable) {
        std::vector<std::vector<std::string>> all;
        all.reserve(factorial);
        std::vector<std::string> current = sorted_langs;
        do {
            all.push_back(current);
        } while (std::next_permutation(current.begin(), current.end()));
        shuffle_inplace(all, rng);
        const std::size_t take = std::min(m, all.size());
        draws.reserve(take);
        for (std::size_t i = 0; i < take; ++i) {
            draws.push_back(Permutation{std::move(all[i])});
        }
    } else {
        draws.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<std::string> order = sorted_langs;
            shuffle_inplace(order, rng);
            draws.push_back(Permutation{std::move(order)});
        }
    }
    return draws;
}

}  // namespace detail

// Language-neutral re-ranking: sample m language permutations, solve the
// chain relaxation for each by shortest path, and keep the chain optimum
// with the highest full set similarity. Ties across permutations go to the
// earliest draw.
inline SelectionReport select_neutral(const CandidatePool& pool, std::size_t m,
                                      std::uint64_t seed,
                                      const SimilarityBackend& backend = cosine_similarity()) {
    const auto start = std::chrono::steady_clock::now();
    pool.validate();
    if (m < 1) {
        throw InvalidInputError("select_neutral: m must be >= 1");
    }

    std::vector<std::string> sorted_langs = pool.languages;
    std::sort(sorted_langs.begin(), sorted_langs.end());
    const auto draws = detail::draw_permutations(std::move(sorted_langs), m, seed);

    PhiMemo memo(pool, backend);
    SelectionReport report;
    report.method = SelectionMethod::Neutral;
    report.seed = seed;
    report.per_permutation.reserve(draws.size());

    double best_score = -1.0;
    std::vector<std::size_t> best_choice;
    for (const auto& sigma : draws) {
        ChainResult chain = chain_best_detail(pool, sigma, memo);
        const double score = memo.set_score(chain.choice);
        PermutationOutcome outcome;
        outcome.sigma = sigma;
        outcome.phi_bar = score;
        outcome.chosen_ids.reserve(chain.indices_along_sigma.size());
        for (std::size_t l = 0; l < chain.indices_along_sigma.size(); ++l) {
            outcome.chosen_ids.push_back(
                memo.candidate(chain.layer_positions[l], chain.indices_along_sigma[l]).id);
        }
        report.per_permutation.push_back(std::move(outcome));
        if (score > best_score) {
            best_score = score;
            best_choice = chain.choice;
        }
    }

    report.chosen = memo.assemble(best_choice);
    report.score = best_score;
    report.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    return report;
}

// Global argmax of set similarity over every candidate combination. The
// search space (product of per-language list sizes) must fit the budget.
inline SummarySet select_exhaustive(const CandidatePool& pool,
                                    std::uint64_t budget = 1'000'000,
                                    const SimilarityBackend& backend = cosine_similarity()) {
    pool.validate();
    std::uint64_t product = 1;
    double approx = 1.0;
    bool exact = true;
    for (const auto& lang : pool.languages) {
        const std::uint64_t k = pool.list(lang).size();
        approx *= static_cast<double>(k);
        if (exact && product > std::numeric_limits<std::uint64_t>::max() / k) {
            exact = false;
        }
        if (exact) product *= k;
    }
    if (!exact || product > budget) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6g", approx);
        throw CapacityError("exhaustive search space of " +
                            (exact ? std::to_string(product) : std::string(buf)) +
                            " sets exceeds budget " + std::to_string(budget));
    }

    PhiMemo memo(pool, backend);
    const std::size_t n = pool.languages.size();
    std::vector<std::size_t> sizes(n);
    for (std::size_t li = 0; li < n; ++li) {
        sizes[li] = memo.list_size(li);
    }

    // Odometer over index vectors in lexicographic declared-language order;
    // strict improvement keeps the smallest tied vector.
    std::vector<std::size_t> choice(n, 0);
    std::vector<std::size_t> best_choice;
    double best_score = -1.0;
    while (true) {
        const double score = memo.set_score(choice);
        if (score > best_score) {
            best_score = score;
            best_choice = choice;
        }
        std::size_t pos = n;
        while (pos-- > 0) {
            if (++choice[pos] < sizes[pos]) break;
            choice[pos] = 0;
            if (pos == 0) return memo.assemble(best_choice);
        }
    }
}

struct RejectionOutcome {
    SummarySet set;
    std::size_t attempts = 0;
};

// Raised when the sampler exhausts its attempt budget; carries the most
// similar set seen so callers can inspect what the pool offered.
class SamplingError : public Error {
public:
    SamplingError(const std::string& what, SummarySet best_seen, double best_phi_bar,
                  std::size_t attempts)
        : Error(what),
          best_seen_(std::move(best_seen)),
          best_phi_bar_(best_phi_bar),
          attempts_(attempts) {}

    const SummarySet& best_seen() const { return best_seen_; }
    double best_phi_bar() const { return best_phi_bar_; }
    std::size_t attempts() const { return attempts_; }

private:
    SummarySet best_seen_;
    double best_phi_bar_;
    std::size_t attempts_;
};

// Exact sampling from the similarity-weighted joint set distribution: draw
// one candidate per language independently from the proposal (uniform unless
// explicit probabilities are attached), then accept the set with probability
// equal to its mean pairwise similarity.
inline RejectionOutcome rejection_sample(const CandidatePool& pool,
                                         std::uint64_t seed,
                                         std::size_t max_attempts = 10'000,
                                         const SimilarityBackend& backend = cosine_similarity()) {
    pool.validate();
    if (max_attempts < 1) {
        throw InvalidInputError("rejection_sample: max_attempts must be >= 1");
    }

    const std::size_t n = pool.languages.size();
    std::vector<std::vector<double>> cdf(n);
    for (std::size_t li = 0; li < n; ++li) {
        const auto& lang = pool.languages[li];
        const auto& list = pool.list(lang);
        auto probs = pool.proposal_probs.find(lang);
        double acc = 0.0;
        cdf[li].reserve(list.size());
        for (std::size_t i = 0; i < list.size(); ++i) {
            acc += probs != pool.proposal_probs.end()
                       ? probs->second[i]
                       : 1.0 / static_cast<double>(list.size());
            cdf[li].push_back(acc);
        }
        cdf[li].back() = 1.0;
    }

    PhiMemo memo(pool, backend);
    Rng rng(seed);
    std::vector<std::size_t> choice(n);
    double best_phi_bar = -1.0;
    std::vector<std::size_t> best_choice;

    for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
        for (std::size_t li = 0; li < n; ++li) {
            const double u = uniform_unit(rng);
            const auto& c = cdf[li];
            choice[li] = static_cast<std::size_t>(
                std::upper_bound(c.begin(), c.end(), u) - c.begin());
            if (choice[li] >= c.size()) choice[li] = c.size() - 1;
        }
        const double phi_bar = memo.set_score(choice);
        if (phi_bar > best_phi_bar) {
            best_phi_bar = phi_bar;
            best_choice = choice;
        }
        const double u = uniform_unit(rng);
        if (phi_bar >= u) {
            return RejectionOutcome{memo.assemble(choice), attempt};
        }
    }
    throw SamplingError("rejection_sample: no acceptance within " +
                            std::to_string(max_attempts) +
                            " attempts (best phi_bar " +
                            std::to_string(best_phi_bar) + ")",
                        memo.assemble(best_choice), best_phi_bar, max_attempts);
}

}  // namespace mtxls
