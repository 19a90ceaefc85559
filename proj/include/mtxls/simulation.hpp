#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mtxls/errors.hpp"
#include "mtxls/pool.hpp"
#include "mtxls/providers.hpp"
#include "mtxls/random.hpp"
#include "mtxls/selection.hpp"

namespace mtxls {

struct SweepSpec {
    std::size_t n_languages = 4;
    std::vector<std::size_t> k_values = {8};
    std::vector<std::size_t> m_values = {6};
    std::size_t trials = 1;
    double noise = 0.2;
    std::uint64_t seed = 0;
    std::vector<SelectionMethod> methods = {SelectionMethod::Neutral};
    std::size_t dimension = 16;
    std::uint64_t budget = 1'000'000;
    bool record_timings = false;

    void validate() const {
        if (n_languages < 2) {
            throw InvalidInputError("sweep: n_languages must be >= 2");
        }
        if (k_values.empty() || m_values.empty()) {
            throw InvalidInputError("sweep: k and m grids must be non-empty");
        }
        for (std::size_t k : k_values) {
            if (k < 1) throw InvalidInputError("sweep: k values must be >= 1");
        }
        for (std::size_t m : m_values) {
            if (m < 1) throw InvalidInputError("sweep: m values must be >= 1");
        }
        if (trials < 1) {
            throw InvalidInputError("sweep: trials must be >= 1");
        }
        if (!(noise >= 0.0)) {
            throw InvalidInputError("sweep: noise must be >= 0");
        }
        if (methods.empty()) {
            throw InvalidInputError("sweep: at least one method required");
        }
        if (dimension < 2) {
            throw InvalidInputError("sweep: dimension must be >= 2");
        }
        for (SelectionMethod method : methods) {
            if (method == SelectionMethod::Rejection) {
                throw InvalidInputError("sweep: rejection is not a sweep method");
            }
            if (method != SelectionMethod::Exhaustive) continue;
            const std::size_t max_k =
                *std::max_element(k_values.begin(), k_values.end());
            std::uint64_t product = 1;
            for (std::size_t i = 0; i < n_languages; ++i) {
                if (product > budget / max_k) {
                    product = budget + 1;
                    break;
                }
                product *= max_k;
            }
            if (product > budget) {
                throw CapacityError(
                    "sweep: exhaustive at max k " + std::to_string(max_k) + " over " +
                    std::to_string(n_languages) + " languages exceeds budget " +
                    std::to_string(budget));
            }
        }
    }
};

struct SweepRow {
    SelectionMethod method = SelectionMethod::Top1;
    std::size_t k = 0;
    std::size_t m = 0;
    std::size_t trial = 0;
    double phi_bar = 0.0;
    double topic_alignment = 0.0;
    double elapsed_ms = 0.0;
};

struct SyntheticPool {
    CandidatePool pool;
    Embedding topic;
};

namespace detail {

inline std::string sweep_language_tag(std::size_t index) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "l%02zu", index);
    return buf;
}

}  // namespace detail

// One-topic pool: every candidate is normalize(topic + noise * gaussian).
// Candidate (language, index) depends only on (pool_seed, language, index),
// so pools truncated to smaller k are exact prefixes of larger ones.
inline SyntheticPool make_synthetic_pool(std::size_t n_languages, std::size_t k,
                                         double noise, std::size_t dimension,
                                         std::uint64_t pool_seed,
                                         const std::string& cluster_id) {
    if (n_languages < 2 || k < 1) {
        throw InvalidInputError("synthetic pool requires n_languages >= 2, k >= 1");
    }
    SyntheticSpec spec{pool_seed, dimension, 1, noise};
    SyntheticPool result{CandidatePool{}, synthetic_topic(spec, 0)};
    result.pool.cluster_id = cluster_id;
    for (std::size_t li = 0; li < n_languages; ++li) {
        const std::string lang = detail::sweep_language_tag(li);
        result.pool.languages.push_back(lang);
        auto& list = result.pool.candidates[lang];
        list.reserve(k);
        for (std::size_t ci = 0; ci < k; ++ci) {
            Candidate cand{cluster_id + "_" + lang + "_" + std::to_string(ci), lang,
                           cluster_id + "_" + lang + "_" + std::to_string(ci),
                           synthetic_candidate(spec, 0, (li << 20) | ci),
                           std::nullopt};
            list.push_back(std::move(cand));
        }
    }
    return result;
}

// Mean phi between the chosen members and the latent topic, the synthetic
// stand-in for reference similarity.
inline double topic_alignment(const SummarySet& set, const Embedding& topic) {
    double sum = 0.0;
    for (const auto& [lang, member] : set.members) {
        sum += phi(member.embedding, topic);
    }
    return sum / static_cast<double>(set.size());
}

namespace detail {

inline std::vector<SweepRow> run_sweep_trial(const SweepSpec& spec,
                                             std::size_t trial) {
    const std::uint64_t trial_seed = derive_seed(spec.seed, trial);
    const std::size_t max_k = *std::max_element(spec.k_values.begin(),
                                                spec.k_values.end());
    const SyntheticPool base =
        make_synthetic_pool(spec.n_languages, max_k, spec.noise, spec.dimension,
                            trial_seed, "trial-" + std::to_string(trial));

    std::vector<SweepRow> rows;
    rows.reserve(spec.k_values.size() * spec.methods.size() * spec.m_values.size());
    for (std::size_t k : spec.k_values) {
        CandidatePool pool = base.pool;
        pool.truncate(k);
        for (SelectionMethod method : spec.methods) {
            for (std::size_t m : spec.m_values) {
                SweepRow row;
                row.method = method;
                row.k = k;
                row.m = m;
                row.trial = trial;
                const auto start = std::chrono::steady_clock::now();
                SummarySet chosen;
                double phi_bar = 0.0;
                switch (method) {
                    case SelectionMethod::Top1:
                        chosen = select_top1(pool);
                        phi_bar = set_similarity(chosen);
                        break;
                    case SelectionMethod::Pivot:
                        chosen = select_pivot(
                            pool, pool.list(pool.languages.front()).front());
                        phi_bar = set_similarity(chosen);
                        break;
                    case SelectionMethod::Neutral: {
                        // The seed ignores m so permutation draws for larger m
                        // extend the draws for smaller m within one trial.
                        SelectionReport report = select_neutral(
                            pool, m, derive_seed(derive_seed(trial_seed, 3), k));
                        chosen = report.chosen;
                        phi_bar = report.score;
                        break;
                    }
                    case SelectionMethod::Exhaustive:
                        chosen = select_exhaustive(pool, spec.budget);
                        phi_bar = set_similarity(chosen);
                        break;
                    case SelectionMethod::Rejection:
                        throw InvalidInputError("sweep: rejection is not a sweep "
                                                "method");
                }
                row.phi_bar = phi_bar;
                row.topic_alignment = topic_alignment(chosen, base.topic);
                if (spec.record_timings) {
                    row.elapsed_ms = std::chrono::duration<double, std::milli>(
                                         std::chrono::steady_clock::now() - start)
                                         .count();
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

}  // namespace detail

// Rows ordered by (trial, k, method, m) over the SweepSpec grids; identical
// output for any worker count because each trial derives its own generator.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::size_t jobs = 1) {
    spec.validate();
    if (jobs < 1) {
        throw InvalidInputError("sweep: jobs must be >= 1");
    }
    std::vector<std::vector<SweepRow>> per_trial(spec.trials);
    if (jobs == 1 || spec.trials == 1) {
        for (std::size_t trial = 0; trial < spec.trials; ++trial) {
            per_trial[trial] = detail::run_sweep_trial(spec, trial);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> workers;
        const std::size_t worker_count = std::min(jobs, spec.trials);
        workers.reserve(worker_count);
        for (std::size_t w = 0; w < worker_count; ++w) {
            workers.emplace_back([&] {
                while (true) {
                    const std::size_t trial = next.fetch_add(1);
                    if (trial >= spec.trials) return;
                    try {
                        per_trial[trial] = detail::run_sweep_trial(spec, trial);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& worker : workers) worker.join();
        if (failure) std::rethrow_exception(failure);
    }
    std::vector<SweepRow> rows;
    for (auto& trial_rows : per_trial) {
        rows.insert(rows.end(), trial_rows.begin(), trial_rows.end());
    }
    return rows;
}

namespace detail {

inline std::string shortest_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
    std::string quoted = "\"";
    for (char c : raw) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

}  // namespace detail

inline const char* sweep_csv_header() {
    return "method,k,m,trial,phi_bar,topic_alignment,elapsed_ms";
}

// Writes header plus one line per row, then renames into place so readers
// never observe a partial file.
inline void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    const std::string temp = path + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot open '" + temp + "' for writing");
        }
        out << sweep_csv_header() << "\n";
        for (const SweepRow& row : rows) {
            out << detail::csv_field(to_string(row.method)) << ',' << row.k << ','
                << row.m << ',' << row.trial << ','
                << detail::shortest_double(row.phi_bar) << ','
                << detail::shortest_double(row.topic_alignment) << ','
                << detail::shortest_double(row.elapsed_ms) << "\n";
        }
        out.flush();
        if (!out) {
            throw Error("write failure on '" + temp + "'");
        }
    }
    if (std::rename(temp.c_str(), path.c_str()) != 0) {
        throw Error("cannot rename '" + temp + "' to '" + path + "'");
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

inline double parse_csv_double(const std::string& field, const std::string& path) {
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw InvalidInputError("'" + path + "': bad numeric field '" + field + "'");
    }
    return value;
}

inline std::size_t parse_csv_size(const std::string& field, const std::string& path) {
    std::size_t value = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw InvalidInputError("'" + path + "': bad integer field '" + field + "'");
    }
    return value;
}

}  // namespace detail

inline std::vector<SweepRow> read_sweep_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path + "' for reading");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw InvalidInputError("'" + path + "': empty CSV");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != sweep_csv_header()) {
        throw InvalidInputError("'" + path + "': unexpected CSV header '" + line + "'");
    }
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 7) {
            throw InvalidInputError("'" + path + "': expected 7 fields, got " +
                                    std::to_string(fields.size()));
        }
        SweepRow row;
        row.method = selection_method_from_string(fields[0]);
        row.k = detail::parse_csv_size(fields[1], path);
        row.m = detail::parse_csv_size(fields[2], path);
        row.trial = detail::parse_csv_size(fields[3], path);
        row.phi_bar = detail::parse_csv_double(fields[4], path);
        row.topic_alignment = detail::parse_csv_double(fields[5], path);
        row.elapsed_ms = detail::parse_csv_double(fields[6], path);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace mtxls
