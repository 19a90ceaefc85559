// Acceptance harness: one timed PASS/FAIL line per criterion, nonzero exit
// if any fails. Oracles come from tests/helpers.hpp and recompute every
// quantity with plain loops, independent of the library's DP and memo paths.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mtxls/clustering.hpp"
#include "mtxls/evaluation.hpp"
#include "mtxls/pool.hpp"
#include "mtxls/providers.hpp"
#include "mtxls/random.hpp"
#include "mtxls/rouge.hpp"
#include "mtxls/selection.hpp"
#include "mtxls/serialization.hpp"
#include "mtxls/similarity.hpp"
#include "mtxls/simulation.hpp"

#include "helpers.hpp"
#include "stub_server.hpp"

using namespace mtxls;

namespace {

void require(bool condition, const std::string& what) {
    if (!condition) throw std::runtime_error(what);
}

std::string scratch_path(const std::string& name) {
    static const std::string root = [] {
        std::string dir = "/tmp/mtxls_acceptance_" + std::to_string(getpid());
        if (std::system(("mkdir -p " + dir).c_str()) != 0) {
            throw std::runtime_error("cannot create scratch directory " + dir);
        }
        return dir;
    }();
    static int counter = 0;
    return root + "/" + std::to_string(counter++) + "_" + name;
}

void run_cli_ok(const std::string& args) {
    const std::string cmd =
        MTXLS_CLI_PATH " " + args + " >/dev/null 2>/dev/null";
    const int status = std::system(cmd.c_str());
    require(WIFEXITED(status) && WEXITSTATUS(status) == 0,
            "cli invocation failed: " + args);
}

// ---- criterion 1 ----

void chain_optimum_exactness() {
    Rng rng(101);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + bounded_uint(rng, 3);
        const std::size_t k = 2 + bounded_uint(rng, 5);
        const CandidatePool pool = testutil::random_pool(n, k, 8, 7000 + trial);
        std::vector<std::string> order = pool.languages;
        shuffle_inplace(order, rng);
        const Permutation sigma{order};
        const SummarySet got = chain_best(pool, sigma);
        const testutil::BruteResult expected =
            testutil::brute_chain(pool, sigma, cosine_similarity());
        require(testutil::set_ids(got) ==
                    testutil::choice_ids(pool, expected.choice),
                "chain optimum mismatch on trial " + std::to_string(trial));
    }
}

// ---- criterion 2 ----

void permutation_average_identity() {
    Rng rng(202);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + bounded_uint(rng, 2);
        SummarySet set;
        for (std::size_t li = 0; li < n; ++li) {
            const std::string lang(1, static_cast<char>('a' + li));
            std::vector<double> values(8);
            for (auto& v : values) v = standard_normal(rng);
            set.insert(testutil::cand(lang + "_doc", lang, values));
        }
        std::vector<std::string> order;
        for (const auto& [lang, member] : set.members) order.push_back(lang);
        double sum = 0.0;
        std::size_t count = 0;
        do {
            sum += chain_similarity(set, Permutation{order});
            ++count;
        } while (std::next_permutation(order.begin(), order.end()));
        const double mean = sum / static_cast<double>(count);
        require(std::abs(mean - set_similarity(set)) <= 1e-9,
                "permutation average deviates on trial " + std::to_string(trial));
    }
}

// ---- criterion 3 ----

void dominance_and_monotonicity() {
    for (int trial = 0; trial < 100; ++trial) {
        const CandidatePool pool = testutil::random_pool(4, 8, 16, 3000 + trial);
        const double exhaustive = set_similarity(select_exhaustive(pool));
        const std::uint64_t seed = derive_seed(33, trial);
        double previous = -1.0;
        double at_24 = -1.0;
        for (std::size_t m = 1; m <= 24; ++m) {
            const SelectionReport report = select_neutral(pool, m, seed);
            const double score = set_similarity(report.chosen);
            require(exhaustive >= score,
                    "neutral exceeds exhaustive at m " + std::to_string(m));
            require(score >= previous,
                    "neutral not monotone at m " + std::to_string(m));
            previous = score;
            if (m == 24) at_24 = score;
        }
        std::vector<std::string> order = pool.languages;
        std::sort(order.begin(), order.end());
        double best_chain = -1.0;
        do {
            best_chain = std::max(
                best_chain, set_similarity(chain_best(pool, Permutation{order})));
        } while (std::next_permutation(order.begin(), order.end()));
        require(at_24 == best_chain,
                "m 24 differs from the best chain optimum on trial " +
                    std::to_string(trial));
    }
}

// ---- criterion 4 ----

struct TableCase {
    std::string name;
    std::size_t k = 0;
    std::vector<double> phis;  // row-major phi[i*k + j]
    std::vector<double> probs_a;
    std::vector<double> probs_b;
};

void rejection_sampler_distribution() {
    const std::vector<TableCase> cases = {
        {"k2 uniform", 2, {0.9, 0.1, 0.2, 0.8}, {}, {}},
        {"k2 weighted", 2, {0.9, 0.1, 0.2, 0.8}, {0.6, 0.4}, {0.3, 0.7}},
        {"k3 uniform", 3,
         {0.9, 0.5, 0.1, 0.4, 0.8, 0.2, 0.3, 0.6, 0.7}, {}, {}},
        {"k3 weighted", 3,
         {0.9, 0.5, 0.1, 0.4, 0.8, 0.2, 0.3, 0.6, 0.7},
         {0.5, 0.3, 0.2},
         {0.2, 0.3, 0.5}},
    };

    for (std::size_t c = 0; c < cases.size(); ++c) {
        const TableCase& tc = cases[c];
        CandidatePool pool;
        pool.languages = {"a", "b"};
        PhiTable table;
        for (std::size_t i = 0; i < tc.k; ++i) {
            pool.candidates["a"].push_back(testutil::cand(
                "a" + std::to_string(i), "a", {1.0, 0.0}));
            pool.candidates["b"].push_back(testutil::cand(
                "b" + std::to_string(i), "b", {1.0, 0.0}));
        }
        for (std::size_t i = 0; i < tc.k; ++i) {
            for (std::size_t j = 0; j < tc.k; ++j) {
                table.set("a" + std::to_string(i), "b" + std::to_string(j),
                          tc.phis[i * tc.k + j]);
            }
        }
        if (!tc.probs_a.empty()) {
            pool.proposal_probs["a"] = tc.probs_a;
            pool.proposal_probs["b"] = tc.probs_b;
        }
        pool.validate();

        auto proposal = [&](std::size_t li, std::size_t i) {
            const auto& probs = li == 0 ? tc.probs_a : tc.probs_b;
            return probs.empty() ? 1.0 / static_cast<double>(tc.k) : probs[i];
        };
        std::vector<double> analytic(tc.k * tc.k);
        double z = 0.0;
        for (std::size_t i = 0; i < tc.k; ++i) {
            for (std::size_t j = 0; j < tc.k; ++j) {
                analytic[i * tc.k + j] =
                    proposal(0, i) * proposal(1, j) * tc.phis[i * tc.k + j];
                z += analytic[i * tc.k + j];
            }
        }
        for (auto& p : analytic) p /= z;

        const int samples = 100'000;
        std::vector<double> counts(tc.k * tc.k, 0.0);
        for (int s = 0; s < samples; ++s) {
            const RejectionOutcome outcome = rejection_sample(
                pool, derive_seed(4000 + c, s), 10'000, table);
            const std::size_t i =
                outcome.set.at("a").id.back() - '0';
            const std::size_t j =
                outcome.set.at("b").id.back() - '0';
            counts[i * tc.k + j] += 1.0;
        }
        double tv = 0.0;
        for (std::size_t cell = 0; cell < counts.size(); ++cell) {
            tv += std::abs(counts[cell] / samples - analytic[cell]);
        }
        tv *= 0.5;
        require(tv < 0.01, tc.name + ": total variation " + std::to_string(tv));
    }

    // Constant phi table: acceptance probability is v everywhere, so the
    // attempt count is geometric with mean 1/v.
    const double v = 0.25;
    CandidatePool pool;
    pool.languages = {"a", "b"};
    PhiTable table;
    for (std::size_t i = 0; i < 2; ++i) {
        pool.candidates["a"].push_back(
            testutil::cand("a" + std::to_string(i), "a", {1.0, 0.0}));
        pool.candidates["b"].push_back(
            testutil::cand("b" + std::to_string(i), "b", {1.0, 0.0}));
        for (std::size_t j = 0; j < 2; ++j) {
            table.set("a" + std::to_string(i), "b" + std::to_string(j), v);
        }
    }
    pool.validate();
    const int trials = 20'000;
    double attempts = 0.0;
    for (int s = 0; s < trials; ++s) {
        attempts += static_cast<double>(
            rejection_sample(pool, derive_seed(777, s), 10'000, table).attempts);
    }
    const double mean_attempts = attempts / trials;
    require(std::abs(mean_attempts - 1.0 / v) <= 0.05 * (1.0 / v),
            "mean attempts " + std::to_string(mean_attempts) +
                " outside 5% of " + std::to_string(1.0 / v));
}

// ---- criterion 5 ----

std::string padded_doc_id(std::size_t index) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "d%02zu", index);
    return buf;
}

void clique_clustering_equality() {
    Rng rng(505);
    for (int g = 0; g < 200; ++g) {
        const std::size_t n = 4 + bounded_uint(rng, 9);
        const std::size_t n_langs = 2 + bounded_uint(rng, n - 1);
        std::vector<std::string> languages(n);
        PairingGraph graph;
        for (std::size_t i = 0; i < n; ++i) {
            languages[i] = "L" + std::to_string(i % n_langs);
            graph.add_document({padded_doc_id(i), languages[i], ""});
        }
        std::set<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (languages[i] == languages[j]) continue;
                if (uniform_unit(rng) < 0.4) {
                    edges.emplace(i, j);
                    graph.add_pairing(padded_doc_id(i), padded_doc_id(j));
                }
            }
        }

        const std::vector<Cluster> clusters = build_clusters(graph);
        std::vector<std::vector<std::string>> got;
        for (const auto& cluster : clusters) {
            std::set<std::string> seen_languages;
            std::vector<std::string> ids;
            for (const auto& [lang, node] : cluster.members) {
                require(seen_languages.insert(lang).second,
                        "duplicate language inside a cluster");
                ids.push_back(node.doc_id);
            }
            std::sort(ids.begin(), ids.end());
            got.push_back(std::move(ids));
        }
        std::vector<std::vector<std::string>> expected;
        for (const auto& clique : testutil::brute_max_cliques(n, edges)) {
            std::vector<std::string> ids;
            for (std::size_t index : clique) ids.push_back(padded_doc_id(index));
            expected.push_back(std::move(ids));
        }
        require(got == expected,
                "cluster set differs from brute force on graph " +
                    std::to_string(g));
    }

    // Bundled fixtures with documented outputs.
    auto load = [](const std::string& name) {
        PairingGraph graph;
        std::vector<PairingRow> rows;
        std::istringstream in(
            testutil::read_file(std::string(MTXLS_FIXTURE_DIR) + "/" + name));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            rows.push_back(parse_pairing_row(line));
            graph.add_document(
                {rows.back().doc_id, rows.back().language, rows.back().summary_ref});
        }
        for (const auto& row : rows) {
            for (const auto& partner : row.paired_with) {
                graph.add_pairing(row.doc_id, partner);
            }
        }
        return build_clusters(graph);
    };

    const std::vector<Cluster> triangle = load("pairs_triangle.jsonl");
    require(triangle.size() == 1 && triangle[0].members.size() == 3,
            "triangle fixture should yield one 3-member cluster");
    const StatsReport stats = cluster_stats(triangle);
    require(stats.size_histogram == std::map<std::size_t, std::size_t>{{3, 1}},
            "triangle histogram should be {3: 1}");

    const std::vector<Cluster> path = load("pairs_path.jsonl");
    require(path.size() == 2, "path fixture should yield two clusters");
    std::set<std::string> mids;
    for (const auto& cluster : path) {
        require(cluster.members.size() == 2, "path clusters have two members");
        for (const auto& [lang, node] : cluster.members) mids.insert(node.doc_id);
    }
    require(mids == std::set<std::string>{"p_en", "p_es", "p_fr"},
            "path clusters should overlap on the middle document");
}

// ---- criterion 6 ----

void rouge_oracle() {
    require(testutil::rouge_fixtures().size() == 20, "expected 20 fixtures");
    for (const auto& f : testutil::rouge_fixtures()) {
        const double got = rouge2_f1(f.candidate, f.reference, f.language);
        require(std::abs(got - f.expected) <= 1e-12,
                std::string("fixture ('") + f.candidate + "', '" + f.reference +
                    "') expected " + std::to_string(f.expected) + ", got " +
                    std::to_string(got));
    }
    Rng rng(606);
    const char* vocabulary[] = {"a", "b", "c", "d", "e"};
    for (int trial = 0; trial < 1000; ++trial) {
        auto draw = [&] {
            std::string text;
            const std::size_t len = bounded_uint(rng, 9);
            for (std::size_t i = 0; i < len; ++i) {
                if (!text.empty()) text += ' ';
                text += vocabulary[bounded_uint(rng, 5)];
            }
            return text;
        };
        const std::string a = draw();
        const std::string b = draw();
        require(rouge2_f1(a, b, "en") == rouge2_f1(b, a, "en"),
                "asymmetry for ('" + a + "', '" + b + "')");
    }
}

// ---- criterion 7 ----

void coherence_identity() {
    Rng rng(707);
    const CosinePhiScorer scorer;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + bounded_uint(rng, 4);
        SummarySet set;
        for (std::size_t li = 0; li < n; ++li) {
            const std::string lang(1, static_cast<char>('a' + li));
            std::vector<double> values(8);
            for (auto& v : values) v = standard_normal(rng);
            set.insert(testutil::cand(lang + "_doc", lang, values));
        }
        const std::map<std::string, double> scores = coherence_scores(set, scorer);
        double sum = 0.0;
        for (const auto& [lang, score] : scores) sum += score;
        const double mean = sum / static_cast<double>(scores.size());
        require(std::abs(mean - set_similarity(set)) <= 1e-12,
                "coherence mean deviates on trial " + std::to_string(trial));
    }
}

// ---- criterion 8 ----

void k_sweep_shape() {
    SweepSpec spec;
    spec.n_languages = 4;
    spec.noise = 0.2;
    spec.trials = 100;
    spec.k_values = {1, 2, 4, 8, 16};
    spec.m_values = {6};
    spec.seed = 61;
    spec.methods = {SelectionMethod::Top1, SelectionMethod::Neutral,
                    SelectionMethod::Exhaustive};
    // Compact dimension: the flat-alignment property weakens as dimension
    // grows because per-candidate noise norms spread the pairwise scores.
    spec.dimension = 3;
    const std::vector<SweepRow> rows = run_sweep(spec, 8);

    std::map<std::size_t, double> exhaustive_prev;  // trial -> phi at last k
    std::map<std::size_t, std::pair<double, double>> alignment;  // k -> (t1, ne)
    std::map<std::size_t, double> neutral_mean;
    for (const auto& row : rows) {
        if (row.method == SelectionMethod::Exhaustive) {
            const auto it = exhaustive_prev.find(row.trial);
            if (it != exhaustive_prev.end()) {
                require(row.phi_bar >= it->second,
                        "exhaustive phi decreased with k on trial " +
                            std::to_string(row.trial));
            }
            exhaustive_prev[row.trial] = row.phi_bar;
        }
        if (row.method == SelectionMethod::Top1) {
            alignment[row.k].first += row.topic_alignment;
        }
        if (row.method == SelectionMethod::Neutral) {
            alignment[row.k].second += row.topic_alignment;
            neutral_mean[row.k] += row.phi_bar;
        }
    }
    double previous_mean = -1.0;
    for (const std::size_t k : spec.k_values) {
        const double mean = neutral_mean.at(k) / 100.0;
        require(mean >= previous_mean,
                "neutral mean phi decreased at k " + std::to_string(k));
        previous_mean = mean;
        const double top1 = alignment.at(k).first / 100.0;
        const double neutral = alignment.at(k).second / 100.0;
        require(std::abs(neutral - top1) <= 0.02 * top1,
                "topic alignment gap at k " + std::to_string(k) + ": top1 " +
                    std::to_string(top1) + " vs neutral " +
                    std::to_string(neutral));
    }
}

// ---- criterion 9 ----

void quadratic_complexity() {
    const std::vector<std::size_t> ks = {16, 32, 64, 128};
    std::vector<double> log_k;
    std::vector<double> log_t;
    double t_at_64 = 0.0;
    for (const std::size_t k : ks) {
        const CandidatePool pool =
            testutil::random_pool(7, k, 16, 880 + k);
        const Permutation sigma{pool.languages};
        std::size_t sink = chain_best(pool, sigma).size();
        const std::size_t reps = std::max<std::size_t>(8, 2'097'152 / (k * k));
        const auto start = std::chrono::steady_clock::now();
        for (std::size_t r = 0; r < reps; ++r) {
            sink += chain_best(pool, sigma).size();
        }
        const double total = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
        require(sink > 0, "unreachable");
        const double per_call = total / static_cast<double>(reps);
        if (k == 64) t_at_64 = per_call;
        log_k.push_back(std::log(static_cast<double>(k)));
        log_t.push_back(std::log(per_call));
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        mean_x += log_k[i];
        mean_y += log_t[i];
    }
    mean_x /= static_cast<double>(ks.size());
    mean_y /= static_cast<double>(ks.size());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        num += (log_k[i] - mean_x) * (log_t[i] - mean_y);
        den += (log_k[i] - mean_x) * (log_k[i] - mean_x);
    }
    const double exponent = num / den;
    require(exponent >= 1.7 && exponent <= 2.3,
            "fit exponent " + std::to_string(exponent) + " outside [1.7, 2.3]");
    require(t_at_64 < 0.1,
            "chain optimum took " + std::to_string(t_at_64 * 1000.0) +
                " ms per permutation at k 64");
}

// ---- criterion 10 ----

void byte_determinism() {
    const std::string pool_fixture =
        std::string(MTXLS_FIXTURE_DIR) + "/pool_n3_k4.jsonl";
    std::vector<std::string> rerank_outputs;
    for (const std::string jobs : {"1", "1", "8"}) {
        const std::string out = scratch_path("rerank_" + jobs + ".jsonl");
        run_cli_ok("rerank " + pool_fixture + " --output " + out +
                   " --method neutral --k 8 --m 6 --seed 42 --jobs " + jobs);
        rerank_outputs.push_back(testutil::read_file(out));
    }
    require(!rerank_outputs[0].empty(), "rerank produced no output");
    require(rerank_outputs[0] == rerank_outputs[1],
            "rerank reruns differ byte-wise");
    require(rerank_outputs[0] == rerank_outputs[2],
            "rerank output depends on job count");

    std::vector<std::string> sweep_outputs;
    for (const std::string jobs : {"1", "1", "8"}) {
        const std::string out = scratch_path("sweep_" + jobs + ".csv");
        run_cli_ok("simulate --n-langs 4 --k 2,4 --m 1,6 --trials 25 --seed 9"
                   " --methods top1,neutral --output " + out + " --jobs " + jobs);
        sweep_outputs.push_back(testutil::read_file(out));
    }
    require(!sweep_outputs[0].empty(), "simulate produced no output");
    require(sweep_outputs[0] == sweep_outputs[1],
            "simulate reruns differ byte-wise");
    require(sweep_outputs[0] == sweep_outputs[2],
            "simulate output depends on job count");
}

// ---- criterion 11 ----

void provider_protocol() {
    testutil::StubServer server;
    ProviderConfig config;
    config.kind = ProviderKind::Remote;
    config.dimension = 8;
    config.endpoint = server.endpoint();
    config.max_batch = 32;
    config.timeout_ms = 5000;
    config.auth_token = "sekrit";
    EmbeddingProvider provider(config);

    std::vector<std::pair<std::string, std::string>> texts;
    for (int i = 0; i < 100; ++i) {
        texts.emplace_back("text " + std::to_string(i), "en");
    }
    const std::vector<Embedding> embedded = provider.embed_batch(texts);
    require(embedded.size() == 100, "expected 100 embeddings");
    require(server.embed_requests() == 4,
            "expected 4 requests, saw " + std::to_string(server.embed_requests()));
    require(server.batch_sizes() == std::vector<std::size_t>{32, 32, 32, 4},
            "unexpected batch split");
    for (int i = 0; i < 100; ++i) {
        const Embedding expected(testutil::StubServer::embedding_for(
            texts[i].first, texts[i].second, 8));
        require(embedded[i].values() == expected.values(),
                "embedding order broken at position " + std::to_string(i));
    }
    for (const auto& header : server.auth_headers()) {
        require(header == "Bearer sekrit", "missing auth header");
    }

    server.fail_next = 2;
    const int before = server.embed_requests();
    const Embedding retried = provider.embed_one("fresh text", "en");
    require(server.embed_requests() == before + 3,
            "expected 2 retries then success");
    const Embedding expected(
        testutil::StubServer::embedding_for("fresh text", "en", 8));
    require(retried.values() == expected.values(),
            "retried embedding mismatch");
}

// ---- harness ----

struct Criterion {
    int index;
    const char* name;
    double time_limit_s;  // 0 = no limit
    std::function<void()> body;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "chain optimum matches brute force on 500 random pools", 10.0,
         chain_optimum_exactness},
        {2, "permutation-averaged chain similarity equals set similarity", 0.0,
         permutation_average_identity},
        {3, "exhaustive dominates neutral; neutral is monotone and exact at m 24",
         60.0, dominance_and_monotonicity},
        {4, "rejection sampler matches the analytic set distribution", 30.0,
         rejection_sampler_distribution},
        {5, "clusters equal brute-force maximal cliques", 0.0,
         clique_clustering_equality},
        {6, "rouge-2 matches 20 hand-computed fixtures and is symmetric", 0.0,
         rouge_oracle},
        {7, "mean coherence under the cosine scorer equals set similarity", 0.0,
         coherence_identity},
        {8, "k-sweep gains are monotone without losing topic alignment", 120.0,
         k_sweep_shape},
        {9, "chain optimum scales quadratically in k", 0.0,
         quadratic_complexity},
        {10, "rerank and simulate reruns are byte-identical", 0.0,
         byte_determinism},
        {11, "provider batching, ordering, retries, and auth headers", 0.0,
         provider_protocol},
    };

    int failed = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string error;
        try {
            criterion.body();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double elapsed = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - start)
                                   .count();
        if (error.empty() && criterion.time_limit_s > 0.0 &&
            elapsed > criterion.time_limit_s) {
            error = "exceeded time limit of " +
                    std::to_string(criterion.time_limit_s) + "s";
        }
        if (error.empty()) {
            std::printf("PASS %2d %s (%.2fs)\n", criterion.index, criterion.name,
                        elapsed);
        } else {
            ++failed;
            std::printf("FAIL %2d %s (%.2fs)\n        %s\n", criterion.index,
                        criterion.name, elapsed, error.c_str());
        }
        std::fflush(stdout);
    }
    std::printf("%d/11 criteria passed\n", 11 - failed);
    return failed == 0 ? 0 : 1;
}
