#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "mtxls/embedding.hpp"
#include "mtxls/errors.hpp"
#include "mtxls/random.hpp"

namespace mtxls {

enum class ProviderKind { Inline, Synthetic, Remote };

inline const char* to_string(ProviderKind kind) {
    switch (kind) {
        case ProviderKind::Inline: return "inline";
        case ProviderKind::Synthetic: return "synthetic";
        case ProviderKind::Remote: return "remote";
    }
    return "unknown";
}

inline ProviderKind provider_kind_from_string(const std::string& name) {
    if (name == "inline") return ProviderKind::Inline;
    if (name == "synthetic") return ProviderKind::Synthetic;
    if (name == "remote") return ProviderKind::Remote;
    throw InvalidInputError("unknown provider kind '" + name + "'");
}

struct SyntheticSpec {
    std::uint64_t seed = 0;
    std::size_t dimension = 1024;
    std::size_t topic_count = 1;
    double noise = 0.2;

    void validate() const {
        if (dimension < 2) {
            throw InvalidInputError("synthetic dimension must be >= 2");
        }
        if (topic_count < 1) {
            throw InvalidInputError("synthetic topic_count must be >= 1");
        }
        if (!(noise >= 0.0)) {
            throw InvalidInputError("synthetic noise must be >= 0");
        }
    }
};

struct ProviderConfig {
    ProviderKind kind = ProviderKind::Inline;
    std::size_t dimension = 1024;
    std::string endpoint;
    std::size_t timeout_ms = 30'000;
    std::size_t max_batch = 32;
    std::string auth_token;
    SyntheticSpec synthetic;

    void validate() const {
        if (dimension < 2) {
            throw InvalidInputError("provider dimension must be >= 2");
        }
        if (kind == ProviderKind::Remote && endpoint.empty()) {
            throw InvalidInputError("remote provider requires an endpoint");
        }
        if (max_batch < 1) {
            throw InvalidInputError("provider max_batch must be >= 1");
        }
        if (timeout_ms < 1) {
            throw InvalidInputError("provider timeout_ms must be >= 1");
        }
        if (kind == ProviderKind::Synthetic) {
            synthetic.validate();
            if (synthetic.dimension != dimension) {
                throw InvalidInputError(
                    "synthetic spec dimension must match provider dimension");
            }
        }
    }
};

namespace detail {

inline std::vector<double> gaussian_vector(std::size_t dimension, Rng& rng) {
    std::vector<double> values(dimension);
    for (auto& v : values) v = standard_normal(rng);
    return values;
}

constexpr std::uint64_t kTopicStream = 0x746f7069ULL;
constexpr std::uint64_t kCandidateStream = 0x63616e64ULL;
constexpr std::uint64_t kTextStream = 0x74657874ULL;

}  // namespace detail

// Direction of topic `topic_index` on the unit sphere, a pure function of the
// spec.
inline Embedding synthetic_topic(const SyntheticSpec& spec, std::size_t topic_index) {
    spec.validate();
    Rng rng(derive_seed(derive_seed(spec.seed, detail::kTopicStream), topic_index));
    return Embedding(detail::gaussian_vector(spec.dimension, rng));
}

// normalize(topic + noise * gaussian); draw_index separates candidates that
// share a topic.
inline Embedding synthetic_candidate(const SyntheticSpec& spec, std::size_t topic_index,
                                     std::uint64_t draw_index) {
    const Embedding topic = synthetic_topic(spec, topic_index);
    Rng rng(derive_seed(
        derive_seed(derive_seed(spec.seed, detail::kCandidateStream), topic_index),
        draw_index));
    std::vector<double> values = detail::gaussian_vector(spec.dimension, rng);
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = topic.values()[i] + spec.noise * values[i];
    }
    return Embedding(std::move(values));
}

struct ScorePair {
    std::string src;
    std::string src_lang;
    std::string mt;
    std::string mt_lang;
    std::optional<Embedding> src_embedding;
    std::optional<Embedding> mt_embedding;
};

struct ScoreBatch {
    std::vector<double> scores;
    std::pair<double, double> range{0.0, 1.0};
};

// Embedding and pair-score source. Inline pools carry embeddings themselves
// and never reach this class's embed path; the synthetic kind derives vectors
// from (text, language, seed); the remote kind speaks the JSON wire protocol
// with batching, two retries with exponential backoff on transient failures,
// and bearer auth. Remote embeddings are memoized in memory per (text, lang).
class EmbeddingProvider {
public:
    explicit EmbeddingProvider(ProviderConfig config) : config_(std::move(config)) {
        config_.validate();
    }

    const ProviderConfig& config() const { return config_; }

    std::vector<Embedding> embed_batch(
        const std::vector<std::pair<std::string, std::string>>& texts) {
        if (texts.empty()) {
            throw InvalidInputError("embed_batch requires a non-empty input list");
        }
        for (const auto& [text, lang] : texts) {
            if (text.empty()) {
                throw InvalidInputError("embed_batch: empty text for language '" +
                                        lang + "'");
            }
        }
        switch (config_.kind) {
            case ProviderKind::Inline:
                throw InvalidInputError(
                    "inline provider cannot embed; inline pools must carry "
                    "embeddings");
            case ProviderKind::Synthetic:
                return embed_synthetic(texts);
            case ProviderKind::Remote:
                return embed_remote(texts);
        }
        throw InvalidInputError("unreachable provider kind");
    }

    Embedding embed_one(const std::string& text, const std::string& language) {
        return embed_batch({{text, language}}).front();
    }

    // One score per pair in order. Remote kind posts to <endpoint>/score;
    // other kinds fall back to phi of the pair's embeddings (carried on the
    // pair, or synthesized for the synthetic kind).
    ScoreBatch score_pairs(const std::vector<ScorePair>& pairs) {
        if (pairs.empty()) {
            throw InvalidInputError("score_pairs requires a non-empty input list");
        }
        if (config_.kind == ProviderKind::Remote) {
            return score_remote(pairs);
        }
        ScoreBatch batch;
        batch.range = {0.0, 1.0};
        batch.scores.reserve(pairs.size());
        for (const auto& pair : pairs) {
            const Embedding src = resolve_embedding(pair.src_embedding, pair.src,
                                                    pair.src_lang, "src");
            const Embedding mt = resolve_embedding(pair.mt_embedding, pair.mt,
                                                   pair.mt_lang, "mt");
            batch.scores.push_back(phi(src, mt));
        }
        return batch;
    }

private:
    Embedding resolve_embedding(const std::optional<Embedding>& carried,
                                const std::string& text, const std::string& lang,
                                const char* side) {
        if (carried.has_value()) return *carried;
        if (config_.kind == ProviderKind::Synthetic) return embed_one(text, lang);
        throw InvalidInputError(std::string("score_pairs: ") + side +
                                " side has no embedding and the inline provider "
                                "cannot embed");
    }

    std::vector<Embedding> embed_synthetic(
        const std::vector<std::pair<std::string, std::string>>& texts) {
        std::vector<Embedding> out;
        out.reserve(texts.size());
        for (const auto& [text, lang] : texts) {
            const std::uint64_t key = fnv1a64(lang, fnv1a64(text) ^ 0x1f);
            const std::size_t topic =
                static_cast<std::size_t>(key % config_.synthetic.topic_count);
            Rng rng(derive_seed(derive_seed(config_.synthetic.seed,
                                            detail::kTextStream),
                                key));
            const Embedding topic_dir = synthetic_topic(config_.synthetic, topic);
            std::vector<double> values =
                detail::gaussian_vector(config_.synthetic.dimension, rng);
            for (std::size_t i = 0; i < values.size(); ++i) {
                values[i] = topic_dir.values()[i] + config_.synthetic.noise * values[i];
            }
            out.emplace_back(std::move(values));
        }
        return out;
    }

    std::vector<Embedding> embed_remote(
        const std::vector<std::pair<std::string, std::string>>& texts) {
        std::vector<Embedding> out(texts.size(),
                                   Embedding(std::vector<double>{1.0, 0.0}));
        std::vector<std::size_t> missing;
        {
            std::lock_guard<std::mutex> lock(memo_mutex_);
            for (std::size_t i = 0; i < texts.size(); ++i) {
                const auto it = embed_memo_.find(texts[i]);
                if (it != embed_memo_.end()) {
                    out[i] = it->second;
                } else {
                    missing.push_back(i);
                }
            }
        }
        for (std::size_t start = 0; start < missing.size();
             start += config_.max_batch) {
            const std::size_t stop =
                std::min(missing.size(), start + config_.max_batch);
            nlohmann::json body;
            body["texts"] = nlohmann::json::array();
            for (std::size_t i = start; i < stop; ++i) {
                body["texts"].push_back({{"text", texts[missing[i]].first},
                                         {"lang", texts[missing[i]].second}});
            }
            const nlohmann::json reply = post_json("/embed", body);
            if (!reply.contains("embeddings") || !reply["embeddings"].is_array()) {
                throw ProtocolError("embed response lacks an 'embeddings' array");
            }
            const auto& rows = reply["embeddings"];
            if (rows.size() != stop - start) {
                throw ProtocolError("embed response returned " +
                                    std::to_string(rows.size()) + " vectors for " +
                                    std::to_string(stop - start) + " inputs");
            }
            for (std::size_t i = start; i < stop; ++i) {
                const auto& row = rows[i - start];
                if (!row.is_array() || row.size() != config_.dimension) {
                    throw ProtocolError(
                        "embed response vector has dimension " +
                        std::to_string(row.size()) + ", expected " +
                        std::to_string(config_.dimension));
                }
                std::vector<double> values;
                values.reserve(row.size());
                for (const auto& v : row) {
                    if (!v.is_number()) {
                        throw ProtocolError("embed response vector holds a "
                                            "non-numeric entry");
                    }
                    values.push_back(v.get<double>());
                }
                out[missing[i]] = Embedding(std::move(values));
            }
        }
        {
            std::lock_guard<std::mutex> lock(memo_mutex_);
            for (std::size_t i : missing) {
                embed_memo_.emplace(texts[i], out[i]);
            }
        }
        return out;
    }

    ScoreBatch score_remote(const std::vector<ScorePair>& pairs) {
        ScoreBatch batch;
        bool have_range = false;
        batch.scores.reserve(pairs.size());
        for (std::size_t start = 0; start < pairs.size(); start += config_.max_batch) {
            const std::size_t stop = std::min(pairs.size(), start + config_.max_batch);
            nlohmann::json body;
            body["pairs"] = nlohmann::json::array();
            for (std::size_t i = start; i < stop; ++i) {
                body["pairs"].push_back({{"src", pairs[i].src},
                                         {"src_lang", pairs[i].src_lang},
                                         {"mt", pairs[i].mt},
                                         {"mt_lang", pairs[i].mt_lang}});
            }
            const nlohmann::json reply = post_json("/score", body);
            if (!reply.contains("scores") || !reply["scores"].is_array()) {
                throw ProtocolError("score response lacks a 'scores' array");
            }
            if (!reply.contains("range") || !reply["range"].is_array() ||
                reply["range"].size() != 2 || !reply["range"][0].is_number() ||
                !reply["range"][1].is_number()) {
                throw ProtocolError("score response lacks a two-number 'range'");
            }
            const std::pair<double, double> range{reply["range"][0].get<double>(),
                                                  reply["range"][1].get<double>()};
            if (have_range && range != batch.range) {
                throw ProtocolError("score response changed its declared range "
                                    "between batches");
            }
            batch.range = range;
            have_range = true;
            const auto& scores = reply["scores"];
            if (scores.size() != stop - start) {
                throw ProtocolError("score response returned " +
                                    std::to_string(scores.size()) + " scores for " +
                                    std::to_string(stop - start) + " pairs");
            }
            for (const auto& s : scores) {
                if (!s.is_number()) {
                    throw ProtocolError("score response holds a non-numeric score");
                }
                const double value = s.get<double>();
                if (value < range.first || value > range.second) {
                    throw ProtocolError("score " + std::to_string(value) +
                                        " falls outside the declared range [" +
                                        std::to_string(range.first) + ", " +
                                        std::to_string(range.second) + "]");
                }
                batch.scores.push_back(value);
            }
        }
        return batch;
    }

    nlohmann::json post_json(const std::string& path, const nlohmann::json& body) {
        const auto [base, prefix] = split_endpoint(config_.endpoint);
        httplib::Client client(base);
        client.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(config_.timeout_ms));
        client.set_write_timeout(std::chrono::milliseconds(config_.timeout_ms));
        httplib::Headers headers;
        if (!config_.auth_token.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.auth_token);
        }
        const std::string payload = body.dump();

        constexpr int kMaxAttempts = 3;  // first try plus two retries
        int backoff_ms = 100;
        std::string failure = "no response";
        int failure_status = 0;
        for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
            auto res = client.Post((prefix + path).c_str(), headers, payload,
                                   "application/json");
            if (res && res->status == 200) {
                nlohmann::json reply = nlohmann::json::parse(res->body, nullptr,
                                                             false);
                if (reply.is_discarded()) {
                    throw ProtocolError("provider returned unparseable JSON from " +
                                        path);
                }
                return reply;
            }
            if (res) {
                failure_status = res->status;
                failure = "status " + std::to_string(res->status) + ": " +
                          res->body.substr(0, 200);
                if (res->status < 500) break;  // non-transient
            } else {
                failure = "transport failure: " + httplib::to_string(res.error());
            }
            if (attempt < kMaxAttempts) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
                backoff_ms *= 2;
            }
        }
        throw ProviderError("POST " + config_.endpoint + path + " failed (" +
                                failure + ")",
                            failure_status);
    }

    static std::pair<std::string, std::string> split_endpoint(
        const std::string& endpoint) {
        const auto scheme_end = endpoint.find("://");
        if (scheme_end == std::string::npos) {
            throw InvalidInputError("endpoint '" + endpoint +
                                    "' must start with http://");
        }
        const auto path_start = endpoint.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            return {endpoint, ""};
        }
        std::string prefix = endpoint.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
        return {endpoint.substr(0, path_start), prefix};
    }

    ProviderConfig config_;
    std::mutex memo_mutex_;
    std::map<std::pair<std::string, std::string>, Embedding> embed_memo_;
};

}  // namespace mtxls
