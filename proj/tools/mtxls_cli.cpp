#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mtxls/clustering.hpp"
#include "mtxls/errors.hpp"
#include "mtxls/evaluation.hpp"
#include "mtxls/pool.hpp"
#include "mtxls/providers.hpp"
#include "mtxls/random.hpp"
#include "mtxls/rouge.hpp"
#include "mtxls/selection.hpp"
#include "mtxls/serialization.hpp"
#include "mtxls/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitProvider = 2;

int classify(const std::exception& e) {
    if (dynamic_cast<const mtxls::ProviderError*>(&e) != nullptr ||
        dynamic_cast<const mtxls::ProtocolError*>(&e) != nullptr) {
        return kExitProvider;
    }
    return kExitValidation;
}

int guard(const std::function<int()>& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    }
}

struct ProviderOptions {
    std::string provider = "inline";
    std::string endpoint;
    std::size_t dimension = 1024;
    std::size_t max_batch = 32;
    std::size_t timeout_ms = 30'000;
    std::size_t topics = 1;
    double noise = 0.2;
};

void add_provider_options(CLI::App* cmd, ProviderOptions& opt) {
    cmd->add_option("--provider", opt.provider,
                    "Embedding provider: inline, synthetic, or remote")
        ->check(CLI::IsMember({"inline", "synthetic", "remote"}));
    cmd->add_option("--endpoint", opt.endpoint,
                    "Remote provider base URL (http://host:port[/prefix])");
    cmd->add_option("--dimension", opt.dimension, "Embedding dimension");
    cmd->add_option("--max-batch", opt.max_batch, "Provider request batch size");
    cmd->add_option("--timeout-ms", opt.timeout_ms, "Provider request timeout");
    cmd->add_option("--topics", opt.topics, "Synthetic provider topic count");
    cmd->add_option("--noise", opt.noise, "Synthetic provider noise scale");
}

mtxls::ProviderConfig make_provider_config(const ProviderOptions& opt,
                                           std::uint64_t seed) {
    mtxls::ProviderConfig cfg;
    cfg.kind = mtxls::provider_kind_from_string(opt.provider);
    cfg.dimension = opt.dimension;
    cfg.endpoint = opt.endpoint;
    cfg.max_batch = opt.max_batch;
    cfg.timeout_ms = opt.timeout_ms;
    if (const char* token = std::getenv("MTXLS_PROVIDER_TOKEN")) {
        cfg.auth_token = token;
    }
    if (cfg.kind == mtxls::ProviderKind::Synthetic) {
        cfg.synthetic =
            mtxls::SyntheticSpec{seed, opt.dimension, opt.topics, opt.noise};
    }
    cfg.validate();
    return cfg;
}

// ---- rerank ----

struct RerankOptions {
    std::string input;
    std::string output;
    std::string method = "neutral";
    std::size_t k = 8;
    std::size_t m = 6;
    bool m_explicit = false;
    std::uint64_t seed = 0;
    std::uint64_t budget = 1'000'000;
    std::size_t max_attempts = 10'000;
    std::string source_lang;
    bool keep_going = false;
    std::size_t jobs = 1;
    ProviderOptions provider;
};

mtxls::SelectionReport run_method(mtxls::CandidatePool pool, const RerankOptions& opt,
                                  mtxls::SelectionMethod method,
                                  std::uint64_t record_seed) {
    pool.truncate(opt.k);
    const auto start = std::chrono::steady_clock::now();
    mtxls::SelectionReport report;
    switch (method) {
        case mtxls::SelectionMethod::Top1: {
            report.chosen = mtxls::select_top1(pool);
            break;
        }
        case mtxls::SelectionMethod::Pivot: {
            if (opt.source_lang.empty()) {
                throw mtxls::InvalidInputError(
                    "method 'pivot' requires --source-lang");
            }
            report.chosen =
                mtxls::select_pivot(pool, pool.list(opt.source_lang).front());
            break;
        }
        case mtxls::SelectionMethod::Neutral: {
            const std::size_t m =
                (pool.languages.size() == 2 && !opt.m_explicit) ? 2 : opt.m;
            return mtxls::select_neutral(pool, m, record_seed);
        }
        case mtxls::SelectionMethod::Exhaustive: {
            report.chosen = mtxls::select_exhaustive(pool, opt.budget);
            break;
        }
        case mtxls::SelectionMethod::Rejection: {
            report.chosen =
                mtxls::rejection_sample(pool, record_seed, opt.max_attempts).set;
            break;
        }
    }
    report.method = method;
    report.seed = record_seed;
    report.score = mtxls::set_similarity(report.chosen);
    report.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    return report;
}

struct WorkItem {
    std::size_t index = 0;
    std::size_t line_no = 0;
    std::string line;
};

struct WorkResult {
    std::size_t line_no = 0;
    bool ok = false;
    std::string out_line;
    std::string error;
    int error_class = kExitValidation;
    double phi_bar = 0.0;
};

template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    bool push(T item) {
        std::unique_lock<std::mutex> lock(mutex_);
        not_full_.wait(lock, [&] { return queue_.size() < capacity_ || closed_; });
        if (closed_) return false;
        queue_.push(std::move(item));
        not_empty_.notify_one();
        return true;
    }

    std::optional<T> pop() {
        std::unique_lock<std::mutex> lock(mutex_);
        not_empty_.wait(lock, [&] { return !queue_.empty() || closed_; });
        if (queue_.empty()) return std::nullopt;
        T item = std::move(queue_.front());
        queue_.pop();
        not_full_.notify_one();
        return item;
    }

    void close() {
        std::lock_guard<std::mutex> lock(mutex_);
        closed_ = true;
        not_full_.notify_all();
        not_empty_.notify_all();
    }

private:
    std::queue<T> queue_;
    std::mutex mutex_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
    std::size_t capacity_;
    bool closed_ = false;
};

// Results are written strictly in record order whatever the completion
// order; pending out-of-order results are bounded by the in-flight record
// count (queue capacity plus one per worker).
class OrderedCollector {
public:
    void deposit(std::size_t index, WorkResult result) {
        std::lock_guard<std::mutex> lock(mutex_);
        pending_.emplace(index, std::move(result));
        ready_.notify_all();
    }

    void set_total(std::size_t total) {
        std::lock_guard<std::mutex> lock(mutex_);
        total_ = total;
        ready_.notify_all();
    }

    // Blocks for result `index`; empty once `index` reaches the total.
    std::optional<WorkResult> next(std::size_t index) {
        std::unique_lock<std::mutex> lock(mutex_);
        ready_.wait(lock, [&] {
            return pending_.count(index) != 0 || (has_total() && index >= total_);
        });
        if (pending_.count(index) == 0) return std::nullopt;
        WorkResult result = std::move(pending_.at(index));
        pending_.erase(index);
        return result;
    }

private:
    bool has_total() const { return total_ != static_cast<std::size_t>(-1); }

    std::map<std::size_t, WorkResult> pending_;
    std::mutex mutex_;
    std::condition_variable ready_;
    std::size_t total_ = static_cast<std::size_t>(-1);
};

int cmd_rerank(const RerankOptions& opt) {
    const mtxls::SelectionMethod method =
        mtxls::selection_method_from_string(opt.method);
    if (opt.k < 1) {
        throw mtxls::InvalidInputError("--k must be >= 1");
    }
    if (opt.jobs < 1) {
        throw mtxls::InvalidInputError("--jobs must be >= 1");
    }

    const mtxls::ProviderConfig provider_cfg =
        make_provider_config(opt.provider, opt.seed);
    std::unique_ptr<mtxls::EmbeddingProvider> provider;
    if (provider_cfg.kind != mtxls::ProviderKind::Inline) {
        provider = std::make_unique<mtxls::EmbeddingProvider>(provider_cfg);
    }

    std::ifstream in(opt.input, std::ios::binary);
    if (!in) {
        throw mtxls::InvalidInputError("cannot open input '" + opt.input + "'");
    }
    std::ofstream out(opt.output, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw mtxls::InvalidInputError("cannot open output '" + opt.output + "'");
    }

    const auto started = std::chrono::steady_clock::now();
    const auto process = [&](const WorkItem& item) {
        WorkResult result;
        result.line_no = item.line_no;
        try {
            mtxls::CandidatePool pool =
                mtxls::parse_pool_record(item.line, provider.get());
            const std::uint64_t record_seed = mtxls::derive_seed(opt.seed, item.index);
            mtxls::SelectionRecord record;
            record.cluster_id = pool.cluster_id;
            record.report = run_method(std::move(pool), opt, method, record_seed);
            result.phi_bar = record.report.score;
            result.out_line = mtxls::serialize_selection_record(record);
            result.ok = true;
        } catch (const std::exception& e) {
            result.error = e.what();
            result.error_class = classify(e);
        }
        return result;
    };

    std::size_t records = 0;
    std::size_t failed = 0;
    int failure_class = kExitOk;
    double phi_sum = 0.0;
    bool aborted = false;

    const auto consume = [&](std::size_t index, WorkResult result) {
        if (result.ok) {
            out << result.out_line << "\n";
            phi_sum += result.phi_bar;
            ++records;
            return true;
        }
        ++failed;
        failure_class = std::max(failure_class, result.error_class);
        std::cerr << "line " << result.line_no << ": " << result.error << "\n";
        (void)index;
        return opt.keep_going;
    };

    if (opt.jobs == 1) {
        std::string line;
        std::size_t line_no = 0;
        std::size_t index = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const WorkResult result = process(WorkItem{index, line_no, line});
            const bool keep = consume(index, result);
            ++index;
            if (!keep) {
                aborted = true;
                break;
            }
        }
    } else {
        BoundedQueue<WorkItem> queue(opt.jobs * 4);
        OrderedCollector collector;
        std::atomic<bool> stop{false};

        std::thread reader([&] {
            std::string line;
            std::size_t line_no = 0;
            std::size_t index = 0;
            while (!stop.load() && std::getline(in, line)) {
                ++line_no;
                if (line.empty()) continue;
                if (!queue.push(WorkItem{index, line_no, std::move(line)})) break;
                ++index;
                line.clear();
            }
            collector.set_total(index);
            queue.close();
        });

        std::vector<std::thread> workers;
        workers.reserve(opt.jobs);
        for (std::size_t w = 0; w < opt.jobs; ++w) {
            workers.emplace_back([&] {
                while (auto item = queue.pop()) {
                    const std::size_t index = item->index;
                    collector.deposit(index, process(*item));
                }
            });
        }

        std::size_t next = 0;
        while (auto result = collector.next(next)) {
            if (!consume(next, std::move(*result))) {
                aborted = true;
                stop.store(true);
                queue.close();
                break;
            }
            ++next;
        }
        reader.join();
        for (auto& worker : workers) worker.join();
    }

    out.flush();
    if (!out) {
        throw mtxls::Error("write failure on '" + opt.output + "'");
    }
    const double elapsed_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - started)
                                  .count();
    std::cerr << "rerank: records=" << records << " failed=" << failed
              << " mean_phi_bar="
              << (records > 0 ? phi_sum / static_cast<double>(records) : 0.0)
              << " elapsed_ms=" << elapsed_ms << "\n";
    if (aborted || failed > 0) {
        return failure_class == kExitOk ? kExitValidation : failure_class;
    }
    return kExitOk;
}

// ---- cluster ----

struct ClusterOptions {
    std::string pairs;
    std::string output;
    std::string stats;
};

int cmd_cluster(const ClusterOptions& opt) {
    std::ifstream in(opt.pairs, std::ios::binary);
    if (!in) {
        throw mtxls::InvalidInputError("cannot open input '" + opt.pairs + "'");
    }
    std::vector<mtxls::PairingRow> rows;
    mtxls::PairingGraph graph;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            mtxls::PairingRow row = mtxls::parse_pairing_row(line);
            graph.add_document({row.doc_id, row.language, row.summary_ref});
            rows.push_back(std::move(row));
        } catch (const mtxls::Error& e) {
            throw mtxls::InvalidInputError("line " + std::to_string(line_no) + ": " +
                                           e.what());
        }
    }
    for (const auto& row : rows) {
        for (const auto& partner : row.paired_with) {
            graph.add_pairing(row.doc_id, partner);
        }
    }

    const std::vector<mtxls::Cluster> clusters = mtxls::build_clusters(graph);
    std::ofstream out(opt.output, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw mtxls::InvalidInputError("cannot open output '" + opt.output + "'");
    }
    for (const auto& cluster : clusters) {
        out << mtxls::serialize_cluster(cluster) << "\n";
    }
    out.flush();
    if (!out) {
        throw mtxls::Error("write failure on '" + opt.output + "'");
    }
    if (!opt.stats.empty()) {
        std::ofstream stats_out(opt.stats, std::ios::binary | std::ios::trunc);
        if (!stats_out) {
            throw mtxls::InvalidInputError("cannot open output '" + opt.stats + "'");
        }
        stats_out << mtxls::stats_to_json(mtxls::cluster_stats(clusters)).dump(2)
                  << "\n";
        stats_out.flush();
        if (!stats_out) {
            throw mtxls::Error("write failure on '" + opt.stats + "'");
        }
    }
    std::cerr << "cluster: documents=" << graph.size() << " edges="
              << graph.edge_count() << " clusters=" << clusters.size() << "\n";
    return kExitOk;
}

// ---- eval ----

struct EvalOptions {
    std::string sets;
    std::string refs;
    std::string output;
    std::string scorer = "cosine";
    std::string group_by = "source";
    std::uint64_t seed = 0;
    std::size_t resamples = 1000;
    ProviderOptions provider;
};

// PairScorer over the provider's /score wire call.
class ProviderScorer : public mtxls::PairScorer {
public:
    explicit ProviderScorer(mtxls::EmbeddingProvider& provider)
        : provider_(&provider) {}

    std::string scorer_id() const override { return "remote"; }

    std::pair<double, double> declared_range() const override { return range_; }

    double score(const mtxls::TextUnit& source,
                 const mtxls::TextUnit& translation) const override {
        mtxls::ScorePair pair{source.text,      source.language,
                              translation.text, translation.language,
                              source.embedding, translation.embedding};
        const mtxls::ScoreBatch batch = provider_->score_pairs({pair});
        range_ = batch.range;
        return batch.scores.front();
    }

private:
    mtxls::EmbeddingProvider* provider_;
    mutable std::pair<double, double> range_{0.0, 1.0};
};

int cmd_eval(const EvalOptions& opt) {
    std::ifstream refs_in(opt.refs, std::ios::binary);
    if (!refs_in) {
        throw mtxls::InvalidInputError("cannot open references '" + opt.refs + "'");
    }
    std::map<std::string, mtxls::ReferenceSet> refs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(refs_in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            mtxls::ReferenceSet set = mtxls::parse_reference_set(line);
            refs[set.cluster_id] = std::move(set);
        } catch (const mtxls::Error& e) {
            throw mtxls::InvalidInputError("references line " +
                                           std::to_string(line_no) + ": " + e.what());
        }
    }

    const mtxls::ProviderConfig provider_cfg =
        make_provider_config(opt.provider, opt.seed);
    std::unique_ptr<mtxls::EmbeddingProvider> provider;
    if (provider_cfg.kind != mtxls::ProviderKind::Inline) {
        provider = std::make_unique<mtxls::EmbeddingProvider>(provider_cfg);
    }

    std::unique_ptr<mtxls::PairScorer> scorer;
    bool external_reference_scores = false;
    if (opt.scorer == "cosine") {
        if (provider) {
            auto* p = provider.get();
            scorer = std::make_unique<mtxls::CosinePhiScorer>(
                [p](const std::string& text, const std::string& lang) {
                    return p->embed_one(text, lang);
                });
            external_reference_scores = true;
        } else {
            scorer = std::make_unique<mtxls::CosinePhiScorer>();
        }
    } else if (opt.scorer == "remote") {
        if (!provider || provider_cfg.kind != mtxls::ProviderKind::Remote) {
            throw mtxls::InvalidInputError(
                "--scorer remote requires --provider remote with --endpoint");
        }
        scorer = std::make_unique<ProviderScorer>(*provider);
        external_reference_scores = true;
    } else {
        throw mtxls::InvalidInputError("unknown scorer '" + opt.scorer + "'");
    }

    std::ifstream sets_in(opt.sets, std::ios::binary);
    if (!sets_in) {
        throw mtxls::InvalidInputError("cannot open sets '" + opt.sets + "'");
    }
    std::vector<mtxls::EvalRecord> records;
    std::size_t skipped = 0;
    line_no = 0;
    while (std::getline(sets_in, line)) {
        ++line_no;
        if (line.empty()) continue;
        mtxls::SelectionRecord sel;
        try {
            sel = mtxls::parse_selection_record(line);
        } catch (const mtxls::Error& e) {
            throw mtxls::InvalidInputError("sets line " + std::to_string(line_no) +
                                           ": " + e.what());
        }
        const auto it = refs.find(sel.cluster_id);
        if (it == refs.end()) {
            std::cerr << "warning: no references for cluster '" << sel.cluster_id
                      << "', skipped\n";
            ++skipped;
            continue;
        }
        mtxls::EvalRecord record;
        record.cluster_id = sel.cluster_id;
        record.method = mtxls::to_string(sel.report.method);
        record.source_language = it->second.source_language;
        record.coherence = mtxls::coherence_scores(sel.report.chosen, *scorer);
        record.coherence_scorer = scorer->scorer_id();
        record.reference = mtxls::reference_scores(
            sel.report.chosen, it->second,
            external_reference_scores ? scorer.get() : nullptr);
        records.push_back(std::move(record));
    }

    const mtxls::GroupBy group_by = opt.group_by == "target"
                                        ? mtxls::GroupBy::Target
                                        : mtxls::GroupBy::Source;
    std::map<std::string, std::vector<mtxls::EvalRecord>> by_method;
    for (const auto& record : records) {
        by_method[record.method].push_back(record);
    }
    mtxls::json aggregates = mtxls::json::object();
    for (const auto& [method, method_records] : by_method) {
        aggregates[method] = mtxls::aggregate_table_to_json(
            mtxls::aggregate(method_records, group_by, opt.seed, opt.resamples));
    }
    mtxls::json report;
    report["aggregates"] = std::move(aggregates);
    report["counts"] = {{"records", records.size()}, {"skipped", skipped}};
    mtxls::json rows = mtxls::json::array();
    for (const auto& record : records) {
        rows.push_back(mtxls::eval_record_to_json(record));
    }
    report["records"] = std::move(rows);

    std::ofstream out(opt.output, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw mtxls::InvalidInputError("cannot open output '" + opt.output + "'");
    }
    out << report.dump(2) << "\n";
    out.flush();
    if (!out) {
        throw mtxls::Error("write failure on '" + opt.output + "'");
    }
    std::cerr << "eval: records=" << records.size() << " skipped=" << skipped
              << "\n";
    return kExitOk;
}

// ---- simulate ----

struct SimulateOptions {
    std::size_t n_langs = 4;
    std::vector<std::size_t> k_values = {8};
    std::vector<std::size_t> m_values = {6};
    std::size_t trials = 1;
    double noise = 0.2;
    std::uint64_t seed = 0;
    std::vector<std::string> methods = {"neutral"};
    std::size_t dimension = 16;
    std::uint64_t budget = 1'000'000;
    std::string output;
    std::size_t jobs = 1;
    bool timings = false;
};

int cmd_simulate(const SimulateOptions& opt) {
    mtxls::SweepSpec spec;
    spec.n_languages = opt.n_langs;
    spec.k_values = opt.k_values;
    spec.m_values = opt.m_values;
    spec.trials = opt.trials;
    spec.noise = opt.noise;
    spec.seed = opt.seed;
    spec.methods.clear();
    for (const auto& name : opt.methods) {
        spec.methods.push_back(mtxls::selection_method_from_string(name));
    }
    spec.dimension = opt.dimension;
    spec.budget = opt.budget;
    spec.record_timings = opt.timings;

    const std::vector<mtxls::SweepRow> rows = mtxls::run_sweep(spec, opt.jobs);
    mtxls::emit_csv(rows, opt.output);
    std::cerr << "simulate: rows=" << rows.size() << " -> " << opt.output << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Cross-lingual summary set selection: re-ranking, clustering, "
        "evaluation, and synthetic sweeps over per-language candidate pools"};
    app.require_subcommand(1);

    RerankOptions rerank;
    CLI::App* rerank_cmd = app.add_subcommand(
        "rerank", "Select one summary per language for each pool record");
    rerank_cmd->add_option("input", rerank.input, "Pool records (JSON lines)")
        ->required();
    rerank_cmd->add_option("--output,-o", rerank.output, "Selection output path")
        ->required();
    rerank_cmd->add_option("--method", rerank.method,
                           "top1, pivot, neutral, exhaustive, or rejection")
        ->check(CLI::IsMember({"top1", "pivot", "neutral", "exhaustive",
                               "rejection"}));
    rerank_cmd->add_option("--k", rerank.k, "Keep only the first k candidates "
                                            "per language");
    CLI::Option* m_opt =
        rerank_cmd->add_option("--m", rerank.m, "Language permutations to sample "
                                                "(2-language records default to 2)");
    rerank_cmd->add_option("--seed", rerank.seed, "Base seed; records derive "
                                                  "their own stream from it");
    rerank_cmd->add_option("--budget", rerank.budget,
                           "Exhaustive search budget (max set count)");
    rerank_cmd->add_option("--max-attempts", rerank.max_attempts,
                           "Rejection sampler attempt cap");
    rerank_cmd->add_option("--source-lang", rerank.source_lang,
                           "Pivot language (its first candidate anchors pivot "
                           "re-ranking)");
    rerank_cmd->add_flag("--keep-going", rerank.keep_going,
                         "Continue past malformed records");
    rerank_cmd->add_option("--jobs", rerank.jobs, "Parallel record workers");
    add_provider_options(rerank_cmd, rerank.provider);

    ClusterOptions cluster;
    CLI::App* cluster_cmd = app.add_subcommand(
        "cluster", "Build maximal-clique clusters from document pairings");
    cluster_cmd->add_option("pairs", cluster.pairs, "Pairing rows (JSON lines)")
        ->required();
    cluster_cmd->add_option("--output,-o", cluster.output, "Cluster output path")
        ->required();
    cluster_cmd->add_option("--stats", cluster.stats, "Cluster statistics path");

    EvalOptions eval;
    CLI::App* eval_cmd = app.add_subcommand(
        "eval", "Score selections against references and for set coherence");
    eval_cmd->add_option("--sets", eval.sets, "Selection records (JSON lines)")
        ->required();
    eval_cmd->add_option("--refs", eval.refs, "Reference records (JSON lines)")
        ->required();
    eval_cmd->add_option("--output,-o", eval.output, "Evaluation report path")
        ->required();
    eval_cmd->add_option("--scorer", eval.scorer, "cosine or remote")
        ->check(CLI::IsMember({"cosine", "remote"}));
    eval_cmd->add_option("--group-by", eval.group_by,
                         "Aggregate rows by source or target language")
        ->check(CLI::IsMember({"source", "target"}));
    eval_cmd->add_option("--seed", eval.seed, "Bootstrap resampling seed");
    eval_cmd->add_option("--resamples", eval.resamples, "Bootstrap resamples");
    add_provider_options(eval_cmd, eval.provider);

    SimulateOptions simulate;
    CLI::App* simulate_cmd = app.add_subcommand(
        "simulate", "Synthetic k/m sweeps over the selection methods");
    simulate_cmd->add_option("--n-langs", simulate.n_langs, "Languages per pool");
    simulate_cmd->add_option("--k", simulate.k_values, "Candidate counts")
        ->delimiter(',');
    simulate_cmd->add_option("--m", simulate.m_values, "Permutation counts")
        ->delimiter(',');
    simulate_cmd->add_option("--trials", simulate.trials, "Trials per grid cell");
    simulate_cmd->add_option("--noise", simulate.noise, "Synthetic noise scale");
    simulate_cmd->add_option("--seed", simulate.seed, "Sweep seed");
    simulate_cmd->add_option("--methods", simulate.methods,
                             "Comma-separated method list")
        ->delimiter(',');
    simulate_cmd->add_option("--dimension", simulate.dimension,
                             "Synthetic embedding dimension");
    simulate_cmd->add_option("--budget", simulate.budget,
                             "Exhaustive search budget");
    simulate_cmd->add_option("--output,-o", simulate.output, "CSV output path")
        ->required();
    simulate_cmd->add_option("--jobs", simulate.jobs, "Parallel trial workers");
    simulate_cmd->add_flag("--timings", simulate.timings,
                           "Record wall-clock timings (breaks byte determinism)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    rerank.m_explicit = m_opt->count() > 0;

    if (rerank_cmd->parsed()) {
        return guard([&] { return cmd_rerank(rerank); });
    }
    if (cluster_cmd->parsed()) {
        return guard([&] { return cmd_cluster(cluster); });
    }
    if (eval_cmd->parsed()) {
        return guard([&] { return cmd_eval(eval); });
    }
    return guard([&] { return cmd_simulate(simulate); });
}
