#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "clausevec/fol.hpp"
#include "clausevec/gnn.hpp"

namespace clausevec {

// Per-clause latency benchmark over the vectorization phases. The first
// repetition is a warm-up and is discarded (it also materializes lazy
// encoder parameters), except when only one repetition is requested, which
// flags the result as low-confidence.
struct PhaseStats {
    double min_us = 0;
    double median_us = 0;
    double max_us = 0;
    int samples = 0;
};

struct EncoderBenchResult {
    std::string encoder;
    int clause_count = 0;
    int repetitions_kept = 0;
    bool low_confidence = false;
    // Phases: parse, graph_build, encode, and their per-clause combination
    // "vectorize" (graph_build + encode timed as one block).
    std::map<std::string, std::vector<double>> samples_us;
    std::map<std::string, PhaseStats> stats;
};

struct RunReport {
    std::string corpus_id;
    std::string config_json;
    int repetitions = 0;
    bool corpus_too_small = false;  // < 100 clauses: medians are noisy
    std::vector<EncoderBenchResult> encoders;
};

struct BenchOptions {
    int repetitions = 3;
    uint64_t seed = 1;
    EncoderConfig config;  // d/rounds shared across encoders; per-kind defaults applied
};

template <class S>
RunReport run_bench(const std::vector<Clause>& corpus, const std::string& corpus_id,
                    const std::vector<EncoderKind>& encoders, const BenchOptions& options);

double median(std::vector<double> values);

std::string report_to_json(const RunReport& report);
std::string report_to_table(const RunReport& report);

}  // namespace clausevec
