#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mtxls/candidate.hpp"
#include "mtxls/embedding.hpp"
#include "mtxls/errors.hpp"
#include "mtxls/random.hpp"
#include "mtxls/rouge.hpp"
#include "mtxls/similarity.hpp"

namespace mtxls {

struct TextUnit {
    std::string text;
    std::string language;
    std::optional<Embedding> embedding;

    static TextUnit from(const Candidate& candidate) {
        return TextUnit{candidate.text, candidate.language, candidate.embedding};
    }
};

// Scores a (source, translation) pair the way a reference-free MT quality
// estimator would. Implementations declare their numeric range; scores are
// never rescaled.
class PairScorer {
public:
    virtual ~PairScorer() = default;
    virtual std::string scorer_id() const = 0;
    virtual std::pair<double, double> declared_range() const = 0;
    virtual double score(const TextUnit& source, const TextUnit& translation) const = 0;
};

// phi of the two embeddings. Units lacking an embedding are embedded through
// the injected function when one is supplied, otherwise rejected.
class CosinePhiScorer : public PairScorer {
public:
    using Embedder = std::function<Embedding(const std::string&, const std::string&)>;

    CosinePhiScorer() = default;
    explicit CosinePhiScorer(Embedder embedder) : embedder_(std::move(embedder)) {}

    std::string scorer_id() const override { return "cosine-phi"; }
    std::pair<double, double> declared_range() const override { return {0.0, 1.0}; }

    double score(const TextUnit& source, const TextUnit& translation) const override {
        return phi(resolve(source, "source"), resolve(translation, "translation"));
    }

private:
    Embedding resolve(const TextUnit& unit, const char* role) const {
        if (unit.embedding.has_value()) return *unit.embedding;
        if (embedder_) return embedder_(unit.text, unit.language);
        throw InvalidInputError(std::string("cosine-phi scorer: ") + role + " '" +
                                unit.language + "' has no embedding and no embedder "
                                "is configured");
    }

    Embedder embedder_;
};

// Per-language coherence: language t's summary scored as a translation of
// every other member's summary, averaged over the N-1 counterparts.
inline std::map<std::string, double> coherence_scores(const SummarySet& set,
                                                      const PairScorer& scorer) {
    if (set.size() < 2) {
        throw InvalidInputError("coherence requires a set of at least 2 summaries");
    }
    std::map<std::string, double> out;
    for (const auto& [lang, member] : set.members) {
        double sum = 0.0;
        for (const auto& [other_lang, other] : set.members) {
            if (other_lang == lang) continue;
            try {
                sum += scorer.score(TextUnit::from(other), TextUnit::from(member));
            } catch (const ProviderError& e) {
                throw ProviderError("scoring pair (source '" + other_lang +
                                        "', translation '" + lang + "'): " + e.what(),
                                    e.status());
            } catch (const Error& e) {
                throw Error("scoring pair (source '" + other_lang +
                            "', translation '" + lang + "'): " + e.what());
            }
        }
        out[lang] = sum / static_cast<double>(set.size() - 1);
    }
    return out;
}

struct RefScore {
    std::optional<double> rouge2;
    std::optional<double> external;
};

struct ReferenceSet {
    std::string cluster_id;
    std::string source_language;
    std::map<std::string, std::string> references;  // language -> reference text

    void validate() const {
        if (source_language.empty()) {
            throw InvalidInputError("reference set '" + cluster_id +
                                    "' has an empty source language");
        }
        if (references.find(source_language) == references.end()) {
            throw InvalidInputError("reference set '" + cluster_id +
                                    "' lacks a reference for its source language '" +
                                    source_language + "'");
        }
    }
};

// Per-language reference-side scores: ROUGE-2 against the same-language
// reference when one exists (absent, never zero, otherwise), plus an optional
// external score of the summary as a translation of the source-language
// reference.
inline std::map<std::string, RefScore> reference_scores(
    const SummarySet& set, const ReferenceSet& refs,
    const PairScorer* scorer = nullptr,
    const std::set<std::string>& non_segmenting = default_non_segmenting_languages()) {
    refs.validate();
    std::map<std::string, RefScore> out;
    const std::string& source_text = refs.references.at(refs.source_language);
    for (const auto& [lang, member] : set.members) {
        RefScore score;
        const auto ref = refs.references.find(lang);
        if (ref != refs.references.end()) {
            score.rouge2 = rouge2_f1(member.text, ref->second, lang, non_segmenting);
        }
        if (scorer != nullptr) {
            TextUnit source{source_text, refs.source_language, std::nullopt};
            score.external = scorer->score(source, TextUnit::from(member));
        }
        out[lang] = score;
    }
    return out;
}

struct EvalRecord {
    std::string cluster_id;
    std::string method;
    std::string source_language;
    std::map<std::string, RefScore> reference;   // per target language
    std::map<std::string, double> coherence;     // per target language
    std::string coherence_scorer;
};

struct AggregateCell {
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t count = 0;
};

struct AggregateRow {
    std::string language;  // grouping key (source or target language)
    std::map<std::string, AggregateCell> highlight;  // metric -> cell
    std::map<std::string, AggregateCell> rest;
    std::size_t records = 0;
};

struct AggregateTable {
    std::vector<AggregateRow> rows;
    std::size_t total_records = 0;
};

enum class GroupBy { Source, Target };

namespace detail {

// Percentile bootstrap of the mean: values are sorted first so the interval
// depends only on the multiset of inputs, never on record order.
inline AggregateCell bootstrap_cell(std::vector<double> values, std::uint64_t seed,
                                    std::size_t resamples) {
    AggregateCell cell;
    cell.count = values.size();
    if (values.empty()) return cell;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    cell.mean = sum / static_cast<double>(values.size());
    if (values.size() == 1 || resamples == 0) {
        cell.ci_lo = cell.mean;
        cell.ci_hi = cell.mean;
        return cell;
    }
    Rng rng(seed);
    std::vector<double> means(resamples);
    for (std::size_t b = 0; b < resamples; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            s += values[bounded_uint(rng, values.size())];
        }
        means[b] = s / static_cast<double>(values.size());
    }
    std::sort(means.begin(), means.end());
    const auto rank = [&](double q) {
        return static_cast<std::size_t>(q * static_cast<double>(resamples - 1) + 0.5);
    };
    cell.ci_lo = means[rank(0.025)];
    cell.ci_hi = means[rank(0.975)];
    return cell;
}

inline void accumulate_metric(std::map<std::string, std::vector<double>>& bucket,
                              const std::string& metric, double value) {
    bucket[metric].push_back(value);
}

inline void collect_record_metrics(
    const EvalRecord& record, const std::string& lang,
    std::map<std::string, std::vector<double>>& bucket) {
    const auto ref = record.reference.find(lang);
    if (ref != record.reference.end()) {
        if (ref->second.rouge2.has_value()) {
            accumulate_metric(bucket, "rouge2_f1", *ref->second.rouge2);
        }
        if (ref->second.external.has_value()) {
            accumulate_metric(bucket, "reference_external", *ref->second.external);
        }
    }
    const auto coh = record.coherence.find(lang);
    if (coh != record.coherence.end()) {
        accumulate_metric(bucket, "coherence", coh->second);
    }
}

}  // namespace detail

// Table 1 shape: one row per grouping language with a highlighted column and
// a "rest" column. Grouped by source, highlight is the source language's own
// target and rest pools every other (record, target) value; grouped by
// target, highlight covers records whose source is the row language.
inline AggregateTable aggregate(const std::vector<EvalRecord>& records,
                                GroupBy group_by = GroupBy::Source,
                                std::uint64_t seed = 0x626f6f74ULL,
                                std::size_t resamples = 1000) {
    AggregateTable table;
    table.total_records = records.size();

    std::set<std::string> row_keys;
    for (const auto& record : records) {
        if (group_by == GroupBy::Source) {
            row_keys.insert(record.source_language);
        } else {
            for (const auto& [lang, _] : record.reference) row_keys.insert(lang);
            for (const auto& [lang, _] : record.coherence) row_keys.insert(lang);
        }
    }

    for (const auto& key : row_keys) {
        AggregateRow row;
        row.language = key;
        std::map<std::string, std::vector<double>> highlight_values;
        std::map<std::string, std::vector<double>> rest_values;
        for (const auto& record : records) {
            if (group_by == GroupBy::Source) {
                if (record.source_language != key) continue;
                ++row.records;
                std::set<std::string> langs;
                for (const auto& [lang, _] : record.reference) langs.insert(lang);
                for (const auto& [lang, _] : record.coherence) langs.insert(lang);
                for (const auto& lang : langs) {
                    detail::collect_record_metrics(
                        record, lang, lang == key ? highlight_values : rest_values);
                }
            } else {
                const bool touches =
                    record.reference.count(key) != 0 || record.coherence.count(key) != 0;
                if (!touches) continue;
                ++row.records;
                detail::collect_record_metrics(
                    record, key,
                    record.source_language == key ? highlight_values : rest_values);
            }
        }
        const std::uint64_t row_seed = derive_seed(seed, fnv1a64(key));
        std::uint64_t metric_stream = 0;
        for (auto& [metric, values] : highlight_values) {
            row.highlight[metric] = detail::bootstrap_cell(
                std::move(values), derive_seed(row_seed, metric_stream++), resamples);
        }
        metric_stream = 0x100;
        for (auto& [metric, values] : rest_values) {
            row.rest[metric] = detail::bootstrap_cell(
                std::move(values), derive_seed(row_seed, metric_stream++), resamples);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace mtxls
