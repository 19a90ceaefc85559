#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtxls/embedding.hpp"
#include "mtxls/errors.hpp"

namespace mtxls {

// One generated summary in one language.
struct Candidate {
    std::string id;
    std::string language;
    std::string text;
    Embedding embedding;
    std::optional<double> gen_score;
};

// Exactly one candidate per target language. The std::map keeps members in
// sorted language order, which fixes the pair-iteration order used by every
// set-level score (bit-reproducible across runs).
struct SummarySet {
    std::map<std::string, Candidate> members;

    std::size_t size() const { return members.size(); }

    std::vector<std::string> languages() const {
        std::vector<std::string> langs;
        langs.reserve(members.size());
        for (const auto& [lang, _] : members) {
            langs.push_back(lang);
        }
        return langs;
    }

    void insert(Candidate candidate) {
        if (candidate.language.empty()) {
            throw InvalidInputError("summary set: candidate with empty language");
        }
        auto lang = candidate.language;
        auto [it, inserted] = members.emplace(std::move(lang), std::move(candidate));
        if (!inserted) {
            throw InvalidInputError("summary set: duplicate language '" +
                                    it->first + "'");
        }
    }

    const Candidate& at(const std::string& language) const {
        auto it = members.find(language);
        if (it == members.end()) {
            throw InvalidInputError("summary set: no member for language '" +
                                    language + "'");
        }
        return it->second;
    }
};

// An ordering of the target languages; each tag appears exactly once.
struct Permutation {
    std::vector<std::string> order;

    // Checks that this permutation is a bijection over `languages`.
    void validate_against(const std::vector<std::string>& languages) const {
        if (order.size() != languages.size()) {
            throw InvalidInputError("permutation: size " +
                                    std::to_string(order.size()) +
                                    " does not match language set of size " +
                                    std::to_string(languages.size()));
        }
        std::vector<std::string> a = order;
        std::vector<std::string> b = languages;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) {
            throw InvalidInputError(
                "permutation: does not cover the language set");
        }
    }

    Permutation reversed() const {
        Permutation rev{order};
        std::reverse(rev.order.begin(), rev.order.end());
        return rev;
    }
};

}  // namespace mtxls
