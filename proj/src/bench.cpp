#include "clausevec/bench.hpp"

#include <algorithm>
#include <chrono>

#include <json.hpp>

#include "clausevec/patterns.hpp"

namespace clausevec {

double median(std::vector<double> values) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point from, Clock::time_point to) {
    return std::chrono::duration<double, std::micro>(to - from).count();
}

PhaseStats stats_of(const std::vector<double>& samples) {
    PhaseStats s;
    s.samples = static_cast<int>(samples.size());
    if (samples.empty()) return s;
    s.min_us = *std::min_element(samples.begin(), samples.end());
    s.max_us = *std::max_element(samples.begin(), samples.end());
    s.median_us = median(samples);
    return s;
}

}  // namespace

template <class S>
RunReport run_bench(const std::vector<Clause>& corpus, const std::string& corpus_id,
                    const std::vector<EncoderKind>& encoders, const BenchOptions& options) {
    if (encoders.empty()) throw ConfigError("bench: no encoders selected");
    if (options.repetitions < 1) throw ConfigError("bench: repetitions must be >= 1");

    RunReport report;
    report.corpus_id = corpus_id;
    report.config_json = options.config.to_json();
    report.repetitions = options.repetitions;
    report.corpus_too_small = corpus.size() < 100;

    // Single-clause texts for the parse phase.
    std::vector<std::string> texts;
    texts.reserve(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i)
        texts.push_back(clause_to_string(corpus[i], static_cast<int>(i + 1)));

    for (EncoderKind kind : encoders) {
        EncoderBenchResult result;
        result.encoder = encoder_kind_name(kind);
        result.clause_count = static_cast<int>(corpus.size());
        result.low_confidence = options.repetitions == 1;
        result.repetitions_kept = options.repetitions == 1 ? 1 : options.repetitions - 1;

        bool is_gnn = encoder_is_gnn(kind);
        EncoderConfig cfg = EncoderConfig::defaults_for(kind);
        cfg.d = options.config.d;
        cfg.rounds = options.config.rounds;
        std::optional<GnnEncoder<S>> encoder;
        if (is_gnn) encoder.emplace(kind, cfg, options.seed);
        PatternConfig pcfg;
        pcfg.d = options.config.d;

        std::vector<FormulaGraph> graphs(corpus.size());
        auto& parse_us = result.samples_us["parse"];
        auto& graph_us = result.samples_us["graph_build"];
        auto& encode_us = result.samples_us["encode"];
        auto& vectorize_us = result.samples_us["vectorize"];

        for (int rep = 0; rep < options.repetitions; ++rep) {
            bool keep = options.repetitions == 1 || rep > 0;
            for (size_t i = 0; i < corpus.size(); ++i) {
                auto t0 = Clock::now();
                Problem parsed = parse_cnf_problem(texts[i]);
                auto t1 = Clock::now();
                (void)parsed;
                if (keep) parse_us.push_back(elapsed_us(t0, t1));

                const Clause& clause = corpus[i];
                if (is_gnn) {
                    auto g0 = Clock::now();
                    graphs[i] = encoder->build_graph(clause);
                    auto g1 = Clock::now();
                    FeatureVector fv = encoder->encode_graph(graphs[i], clause.id);
                    auto g2 = Clock::now();
                    if (keep) {
                        graph_us.push_back(elapsed_us(g0, g1));
                        encode_us.push_back(elapsed_us(g1, g2));
                        vectorize_us.push_back(elapsed_us(g0, g2));
                    }
                } else {
                    auto g0 = Clock::now();
                    FeatureVector fv = kind == EncoderKind::term_walks
                                           ? encode_term_walks(clause, pcfg)
                                           : encode_chain_patterns(clause, pcfg);
                    auto g1 = Clock::now();
                    (void)fv;
                    if (keep) {
                        graph_us.push_back(0.0);  // pattern encoders build no graph
                        encode_us.push_back(elapsed_us(g0, g1));
                        vectorize_us.push_back(elapsed_us(g0, g1));
                    }
                }
            }
        }

        for (const auto& [phase, samples] : result.samples_us)
            result.stats[phase] = stats_of(samples);
        report.encoders.push_back(std::move(result));
    }
    return report;
}

std::string report_to_json(const RunReport& report) {
    nlohmann::json j;
    j["corpus"] = report.corpus_id;
    j["config"] = nlohmann::json::parse(report.config_json);
    j["repetitions"] = report.repetitions;
    j["corpus_too_small"] = report.corpus_too_small;
    j["encoders"] = nlohmann::json::array();
    for (const auto& enc : report.encoders) {
        nlohmann::json e;
        e["encoder"] = enc.encoder;
        e["clauses"] = enc.clause_count;
        e["repetitions_kept"] = enc.repetitions_kept;
        e["low_confidence"] = enc.low_confidence;
        for (const auto& [phase, stats] : enc.stats)
            e["phases"][phase] = nlohmann::json{{"min_us", stats.min_us},
                                                {"median_us", stats.median_us},
                                                {"max_us", stats.max_us},
                                                {"samples", stats.samples}};
        j["encoders"].push_back(std::move(e));
    }
    return j.dump(2);
}

std::string report_to_table(const RunReport& report) {
    char line[256];
    std::string out;
    std::snprintf(line, sizeof(line), "%-16s %-12s %12s %12s %12s\n", "encoder", "phase",
                  "min_us", "median_us", "max_us");
    out += line;
    for (const auto& enc : report.encoders) {
        for (const char* phase : {"parse", "graph_build", "encode", "vectorize"}) {
            auto it = enc.stats.find(phase);
            if (it == enc.stats.end()) continue;
            std::snprintf(line, sizeof(line), "%-16s %-12s %12.2f %12.2f %12.2f\n",
                          enc.encoder.c_str(), phase, it->second.min_us,
                          it->second.median_us, it->second.max_us);
            out += line;
        }
    }
    if (report.corpus_too_small)
        out += "warning: corpus has fewer than 100 clauses; medians are noisy\n";
    for (const auto& enc : report.encoders)
        if (enc.low_confidence) {
            out += "warning: single repetition, timings include warm-up effects\n";
            break;
        }
    return out;
}

template RunReport run_bench<float>(const std::vector<Clause>&, const std::string&,
                                    const std::vector<EncoderKind>&, const BenchOptions&);
template RunReport run_bench<double>(const std::vector<Clause>&, const std::string&,
                                     const std::vector<EncoderKind>&, const BenchOptions&);

}  // namespace clausevec
