#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mtxls/candidate.hpp"
#include "mtxls/errors.hpp"

namespace mtxls {

// Per-cluster candidate lists: for each target language, an ordered list of
// k candidates, best-first as produced by the upstream generator. Lists may
// be ragged (different k per language). Optional per-candidate proposal
// probabilities back the rejection sampler; absent means uniform.
struct CandidatePool {
    std::string cluster_id;
    std::vector<std::string> languages;
    std::map<std::string, std::vector<Candidate>> candidates;
    std::map<std::string, std::vector<double>> proposal_probs;

    const std::vector<Candidate>& list(const std::string& language) const {
        auto it = candidates.find(language);
        if (it == candidates.end() || it->second.empty()) {
            throw InvalidInputError("pool " + cluster_id +
                                    ": no candidates for language '" + language +
                                    "'");
        }
        return it->second;
    }

    std::size_t total_candidates() const {
        std::size_t total = 0;
        for (const auto& lang : languages) {
            total += list(lang).size();
        }
        return total;
    }

    // Keep only the first `k` candidates per language (and the matching
    // proposal-probability prefixes, renormalized).
    void truncate(std::size_t k) {
        if (k == 0) {
            throw InvalidInputError("pool truncation: k must be >= 1");
        }
        for (auto& [lang, list] : candidates) {
            if (list.size() > k) {
                list.resize(k);
            }
            auto probs = proposal_probs.find(lang);
            if (probs != proposal_probs.end() && probs->second.size() > k) {
                probs->second.resize(k);
                double total = 0.0;
                for (double p : probs->second) total += p;
                if (!(total > 0.0)) {
                    throw InvalidInputError("pool " + cluster_id +
                                            ": proposal probabilities for '" +
                                            lang + "' vanish after truncation");
                }
                for (double& p : probs->second) p /= total;
            }
        }
    }

    void validate() const {
        if (languages.size() < 2) {
            throw InvalidInputError("pool " + cluster_id +
                                    ": needs at least 2 languages");
        }
        std::set<std::string> seen_langs;
        std::set<std::string> seen_ids;
        for (const auto& lang : languages) {
            if (lang.empty()) {
                throw InvalidInputError("pool " + cluster_id + ": empty language tag");
            }
            if (!seen_langs.insert(lang).second) {
                throw InvalidInputError("pool " + cluster_id +
                                        ": duplicate language '" + lang + "'");
            }
            const auto& list = this->list(lang);
            for (const auto& cand : list) {
                if (cand.language != lang) {
                    throw InvalidInputError("pool " + cluster_id + ": candidate '" +
                                            cand.id + "' tagged '" + cand.language +
                                            "' listed under '" + lang + "'");
                }
                if (!seen_ids.insert(cand.id).second) {
                    throw InvalidInputError("pool " + cluster_id +
                                            ": duplicate candidate id '" + cand.id +
                                            "'");
                }
            }
            auto probs = proposal_probs.find(lang);
            if (probs != proposal_probs.end()) {
                if (probs->second.size() != list.size()) {
                    throw InvalidInputError(
                        "pool " + cluster_id + ": proposal probabilities for '" +
                        lang + "' have length " +
                        std::to_string(probs->second.size()) + ", expected " +
                        std::to_string(list.size()));
                }
                double total = 0.0;
                for (double p : probs->second) {
                    if (!(p >= 0.0) || !std::isfinite(p)) {
                        throw InvalidInputError("pool " + cluster_id +
                                                ": negative or non-finite proposal "
                                                "probability for '" + lang + "'");
                    }
                    total += p;
                }
                if (std::abs(total - 1.0) > 1e-9) {
                    throw InvalidInputError("pool " + cluster_id +
                                            ": proposal probabilities for '" + lang +
                                            "' sum to " + std::to_string(total));
                }
            }
        }
        for (const auto& [lang, _] : candidates) {
            if (!seen_langs.count(lang)) {
                throw InvalidInputError("pool " + cluster_id + ": candidate list for '" +
                                        lang + "' not in declared language set");
            }
        }
    }
};

}  // namespace mtxls
