#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mtxls/candidate.hpp"
#include "mtxls/clustering.hpp"
#include "mtxls/errors.hpp"
#include "mtxls/evaluation.hpp"
#include "mtxls/pool.hpp"
#include "mtxls/providers.hpp"
#include "mtxls/selection.hpp"

namespace mtxls {

// Objects parse from and serialize to single JSON lines. nlohmann orders
// object keys alphabetically, so serialized bytes are deterministic.
using json = nlohmann::json;

namespace detail {

// Embeddings are stored with 9 significant digits; load-time normalization
// absorbs the rounding.
inline double round_to_9(double value) {
    char buf[40];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 9);
    double parsed = 0.0;
    std::from_chars(buf, res.ptr, parsed);
    return parsed;
}

inline json embedding_to_json(const Embedding& embedding) {
    json arr = json::array();
    for (double v : embedding.values()) arr.push_back(round_to_9(v));
    return arr;
}

inline std::vector<double> number_array(const json& value, const std::string& what) {
    if (!value.is_array() || value.empty()) {
        throw InvalidInputError(what + " must be a non-empty array of numbers");
    }
    std::vector<double> out;
    out.reserve(value.size());
    for (const auto& v : value) {
        if (!v.is_number()) {
            throw InvalidInputError(what + " must hold only numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

inline std::string require_string(const json& obj, const char* key,
                                  const std::string& context) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        throw InvalidInputError(context + ": missing string field '" + key + "'");
    }
    return obj[key].get<std::string>();
}

inline json parse_line(const std::string& line, const std::string& context) {
    json parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        throw InvalidInputError(context + ": not a JSON object");
    }
    return parsed;
}

}  // namespace detail

// ---- candidate pools ----

inline json candidate_to_json(const Candidate& candidate,
                              std::optional<double> proposal_prob = std::nullopt) {
    json obj;
    obj["id"] = candidate.id;
    obj["text"] = candidate.text;
    obj["embedding"] = detail::embedding_to_json(candidate.embedding);
    if (candidate.gen_score.has_value()) obj["gen_score"] = *candidate.gen_score;
    if (proposal_prob.has_value()) obj["proposal_prob"] = *proposal_prob;
    return obj;
}

inline std::string serialize_pool_record(const CandidatePool& pool) {
    json obj;
    obj["cluster_id"] = pool.cluster_id;
    obj["languages"] = pool.languages;
    json cands = json::object();
    for (const auto& lang : pool.languages) {
        json arr = json::array();
        const auto probs = pool.proposal_probs.find(lang);
        const auto& list = pool.list(lang);
        for (std::size_t i = 0; i < list.size(); ++i) {
            arr.push_back(candidate_to_json(
                list[i], probs == pool.proposal_probs.end()
                             ? std::nullopt
                             : std::optional<double>(probs->second[i])));
        }
        cands[lang] = std::move(arr);
    }
    obj["candidates"] = std::move(cands);
    return obj.dump();
}

// Parses one pool line. With a non-inline provider the record must omit
// embeddings (they are fetched in one batch per record); without one the
// record must carry an embedding on every candidate.
inline CandidatePool parse_pool_record(const std::string& line,
                                       EmbeddingProvider* provider = nullptr) {
    const bool external_embeddings =
        provider != nullptr && provider->config().kind != ProviderKind::Inline;
    const json obj = detail::parse_line(line, "pool record");
    CandidatePool pool;
    pool.cluster_id = detail::require_string(obj, "cluster_id", "pool record");
    const std::string context = "pool record '" + pool.cluster_id + "'";
    if (!obj.contains("languages") || !obj["languages"].is_array()) {
        throw InvalidInputError(context + ": missing 'languages' array");
    }
    for (const auto& lang : obj["languages"]) {
        if (!lang.is_string()) {
            throw InvalidInputError(context + ": language tags must be strings");
        }
        pool.languages.push_back(lang.get<std::string>());
    }
    if (!obj.contains("candidates") || !obj["candidates"].is_object()) {
        throw InvalidInputError(context + ": missing 'candidates' object");
    }

    struct PendingCandidate {
        std::string id;
        std::string text;
        std::optional<double> gen_score;
    };
    std::vector<std::pair<std::string, std::string>> embed_inputs;
    std::map<std::string, std::vector<PendingCandidate>> pending;

    for (const auto& lang : pool.languages) {
        const auto it = obj["candidates"].find(lang);
        if (it == obj["candidates"].end() || !it->is_array() || it->empty()) {
            throw InvalidInputError(context + ": no candidate array for language '" +
                                    lang + "'");
        }
        std::optional<bool> lang_has_probs;
        for (const auto& entry : *it) {
            if (!entry.is_object()) {
                throw InvalidInputError(context + ": candidate entries must be "
                                        "objects");
            }
            const std::string id = detail::require_string(entry, "id", context);
            const std::string text = detail::require_string(entry, "text", context);
            std::optional<double> gen_score;
            if (entry.contains("gen_score")) {
                if (!entry["gen_score"].is_number()) {
                    throw InvalidInputError(context + ": candidate '" + id +
                                            "' has a non-numeric gen_score");
                }
                gen_score = entry["gen_score"].get<double>();
            }
            const bool has_prob = entry.contains("proposal_prob");
            if (lang_has_probs.has_value() && *lang_has_probs != has_prob) {
                throw InvalidInputError(context + ": language '" + lang +
                                        "' mixes candidates with and without "
                                        "proposal_prob");
            }
            lang_has_probs = has_prob;
            if (has_prob) {
                if (!entry["proposal_prob"].is_number()) {
                    throw InvalidInputError(context + ": candidate '" + id +
                                            "' has a non-numeric proposal_prob");
                }
                pool.proposal_probs[lang].push_back(
                    entry["proposal_prob"].get<double>());
            }

            const bool has_embedding = entry.contains("embedding");
            if (external_embeddings) {
                if (has_embedding) {
                    throw InvalidInputError(context + ": candidate '" + id +
                                            "' carries an embedding but a provider "
                                            "is configured");
                }
                pending[lang].push_back({id, text, gen_score});
                embed_inputs.emplace_back(text, lang);
            } else {
                if (!has_embedding) {
                    throw InvalidInputError(context + ": candidate '" + id +
                                            "' lacks an embedding and no provider "
                                            "is configured");
                }
                pool.candidates[lang].push_back(Candidate{
                    id, lang, text,
                    Embedding(detail::number_array(entry["embedding"],
                                                   context + ": embedding of '" + id +
                                                       "'")),
                    gen_score});
            }
        }
    }

    if (external_embeddings && !embed_inputs.empty()) {
        const std::vector<Embedding> embedded = provider->embed_batch(embed_inputs);
        std::size_t cursor = 0;
        for (const auto& lang : pool.languages) {
            for (const auto& pc : pending[lang]) {
                pool.candidates[lang].push_back(
                    Candidate{pc.id, lang, pc.text, embedded[cursor++], pc.gen_score});
            }
        }
    }
    pool.validate();
    return pool;
}

// ---- selection reports ----

struct SelectionRecord {
    std::string cluster_id;
    SelectionReport report;
};

// elapsed_ms stays out of the line so identical runs serialize to identical
// bytes; timings are reported on stderr by the CLI instead.
inline std::string serialize_selection_record(const SelectionRecord& record) {
    json obj;
    obj["cluster_id"] = record.cluster_id;
    obj["method"] = to_string(record.report.method);
    obj["seed"] = record.report.seed;
    obj["score"] = record.report.score;
    json chosen = json::object();
    for (const auto& [lang, member] : record.report.chosen.members) {
        chosen[lang] = candidate_to_json(member);
    }
    obj["chosen"] = std::move(chosen);
    json perms = json::array();
    for (const auto& outcome : record.report.per_permutation) {
        json p;
        p["order"] = outcome.sigma.order;
        p["ids"] = outcome.chosen_ids;
        p["phi_bar"] = outcome.phi_bar;
        perms.push_back(std::move(p));
    }
    obj["per_permutation"] = std::move(perms);
    return obj.dump();
}

inline SelectionRecord parse_selection_record(const std::string& line) {
    const json obj = detail::parse_line(line, "selection record");
    SelectionRecord record;
    record.cluster_id = detail::require_string(obj, "cluster_id", "selection record");
    const std::string context = "selection record '" + record.cluster_id + "'";
    record.report.method =
        selection_method_from_string(detail::require_string(obj, "method", context));
    if (!obj.contains("seed") || !obj["seed"].is_number()) {
        throw InvalidInputError(context + ": missing numeric 'seed'");
    }
    record.report.seed = obj["seed"].get<std::uint64_t>();
    if (!obj.contains("score") || !obj["score"].is_number()) {
        throw InvalidInputError(context + ": missing numeric 'score'");
    }
    record.report.score = obj["score"].get<double>();
    if (!obj.contains("chosen") || !obj["chosen"].is_object() ||
        obj["chosen"].empty()) {
        throw InvalidInputError(context + ": missing 'chosen' object");
    }
    for (const auto& [lang, entry] : obj["chosen"].items()) {
        if (!entry.is_object() || !entry.contains("embedding")) {
            throw InvalidInputError(context + ": chosen member for '" + lang +
                                    "' must carry an embedding");
        }
        std::optional<double> gen_score;
        if (entry.contains("gen_score") && entry["gen_score"].is_number()) {
            gen_score = entry["gen_score"].get<double>();
        }
        record.report.chosen.insert(Candidate{
            detail::require_string(entry, "id", context), lang,
            detail::require_string(entry, "text", context),
            Embedding(detail::number_array(entry["embedding"],
                                           context + ": embedding for '" + lang +
                                               "'")),
            gen_score});
    }
    if (obj.contains("per_permutation")) {
        if (!obj["per_permutation"].is_array()) {
            throw InvalidInputError(context + ": 'per_permutation' must be an array");
        }
        for (const auto& p : obj["per_permutation"]) {
            PermutationOutcome outcome;
            if (!p.is_object() || !p.contains("order") || !p["order"].is_array() ||
                !p.contains("ids") || !p["ids"].is_array() ||
                !p.contains("phi_bar") || !p["phi_bar"].is_number()) {
                throw InvalidInputError(context + ": malformed permutation outcome");
            }
            for (const auto& lang : p["order"]) {
                outcome.sigma.order.push_back(lang.get<std::string>());
            }
            for (const auto& id : p["ids"]) {
                outcome.chosen_ids.push_back(id.get<std::string>());
            }
            outcome.phi_bar = p["phi_bar"].get<double>();
            record.report.per_permutation.push_back(std::move(outcome));
        }
    }
    return record;
}

// ---- clusters ----

inline std::string serialize_cluster(const Cluster& cluster) {
    json obj;
    obj["cluster_id"] = cluster.cluster_id;
    json members = json::object();
    for (const auto& [lang, node] : cluster.members) {
        json m;
        m["doc_id"] = node.doc_id;
        if (!node.summary_ref.empty()) m["summary_ref"] = node.summary_ref;
        members[lang] = std::move(m);
    }
    obj["members"] = std::move(members);
    return obj.dump();
}

inline Cluster parse_cluster(const std::string& line) {
    const json obj = detail::parse_line(line, "cluster record");
    Cluster cluster;
    cluster.cluster_id = detail::require_string(obj, "cluster_id", "cluster record");
    const std::string context = "cluster record '" + cluster.cluster_id + "'";
    if (!obj.contains("members") || !obj["members"].is_object()) {
        throw InvalidInputError(context + ": missing 'members' object");
    }
    for (const auto& [lang, entry] : obj["members"].items()) {
        DocumentNode node;
        node.doc_id = detail::require_string(entry, "doc_id", context);
        node.language = lang;
        if (entry.contains("summary_ref") && entry["summary_ref"].is_string()) {
            node.summary_ref = entry["summary_ref"].get<std::string>();
        }
        cluster.members.emplace(lang, std::move(node));
    }
    return cluster;
}

inline json stats_to_json(const StatsReport& stats) {
    json obj;
    json histogram = json::object();
    for (const auto& [size, count] : stats.size_histogram) {
        histogram[std::to_string(size)] = count;
    }
    obj["size_histogram"] = std::move(histogram);
    json per_language = json::object();
    for (const auto& [lang, by_size] : stats.per_language) {
        json row = json::object();
        for (const auto& [size, count] : by_size) {
            row[std::to_string(size)] = count;
        }
        per_language[lang] = std::move(row);
    }
    obj["per_language"] = std::move(per_language);
    json pairs = json::array();
    for (const auto& [pair, count] : stats.language_pairs) {
        pairs.push_back({{"a", pair.first}, {"b", pair.second}, {"count", count}});
    }
    obj["language_pairs"] = std::move(pairs);
    obj["totals"] = {{"clusters", stats.total_clusters},
                     {"incidences", stats.total_incidences},
                     {"documents", stats.distinct_documents}};
    return obj;
}

// ---- pairing rows (cmd_cluster input) ----

struct PairingRow {
    std::string doc_id;
    std::string language;
    std::string summary_ref;
    std::vector<std::string> paired_with;
};

inline PairingRow parse_pairing_row(const std::string& line) {
    const json obj = detail::parse_line(line, "pairing row");
    PairingRow row;
    row.doc_id = detail::require_string(obj, "doc_id", "pairing row");
    row.language =
        detail::require_string(obj, "language", "pairing row '" + row.doc_id + "'");
    if (obj.contains("summary_ref") && obj["summary_ref"].is_string()) {
        row.summary_ref = obj["summary_ref"].get<std::string>();
    }
    if (obj.contains("paired_with")) {
        if (!obj["paired_with"].is_array()) {
            throw InvalidInputError("pairing row '" + row.doc_id +
                                    "': 'paired_with' must be an array");
        }
        for (const auto& id : obj["paired_with"]) {
            if (!id.is_string()) {
                throw InvalidInputError("pairing row '" + row.doc_id +
                                        "': paired ids must be strings");
            }
            row.paired_with.push_back(id.get<std::string>());
        }
    }
    return row;
}

// ---- reference sets ----

inline std::string serialize_reference_set(const ReferenceSet& refs) {
    json obj;
    obj["cluster_id"] = refs.cluster_id;
    obj["source_language"] = refs.source_language;
    obj["references"] = refs.references;
    return obj.dump();
}

inline ReferenceSet parse_reference_set(const std::string& line) {
    const json obj = detail::parse_line(line, "reference record");
    ReferenceSet refs;
    refs.cluster_id = detail::require_string(obj, "cluster_id", "reference record");
    const std::string context = "reference record '" + refs.cluster_id + "'";
    refs.source_language = detail::require_string(obj, "source_language", context);
    if (!obj.contains("references") || !obj["references"].is_object()) {
        throw InvalidInputError(context + ": missing 'references' object");
    }
    for (const auto& [lang, text] : obj["references"].items()) {
        if (!text.is_string()) {
            throw InvalidInputError(context + ": reference texts must be strings");
        }
        refs.references[lang] = text.get<std::string>();
    }
    refs.validate();
    return refs;
}

// ---- evaluation report ----

inline json eval_record_to_json(const EvalRecord& record) {
    json obj;
    obj["cluster_id"] = record.cluster_id;
    obj["method"] = record.method;
    obj["source_language"] = record.source_language;
    json reference = json::object();
    for (const auto& [lang, score] : record.reference) {
        json cell = json::object();
        if (score.rouge2.has_value()) cell["rouge2_f1"] = *score.rouge2;
        if (score.external.has_value()) cell["external"] = *score.external;
        reference[lang] = std::move(cell);
    }
    obj["reference"] = std::move(reference);
    obj["coherence"] = record.coherence;
    obj["coherence_scorer"] = record.coherence_scorer;
    return obj;
}

inline json aggregate_cell_to_json(const AggregateCell& cell) {
    return {{"mean", cell.mean},
            {"ci_lo", cell.ci_lo},
            {"ci_hi", cell.ci_hi},
            {"count", cell.count}};
}

inline json aggregate_table_to_json(const AggregateTable& table) {
    json rows = json::array();
    for (const auto& row : table.rows) {
        json r;
        r["language"] = row.language;
        r["records"] = row.records;
        json highlight = json::object();
        for (const auto& [metric, cell] : row.highlight) {
            highlight[metric] = aggregate_cell_to_json(cell);
        }
        r["highlight"] = std::move(highlight);
        json rest = json::object();
        for (const auto& [metric, cell] : row.rest) {
            rest[metric] = aggregate_cell_to_json(cell);
        }
        r["rest"] = std::move(rest);
        rows.push_back(std::move(r));
    }
    return {{"rows", std::move(rows)}, {"total_records", table.total_records}};
}

}  // namespace mtxls
