// clausevec CLI: vectorize TPTP CNF corpora, benchmark encoder runtimes, run
// the toy training task, and run encoder gradient checks.
//
// Exit codes: 0 success, 2 input error, 3 config error, 4 numeric failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "clausevec/autodiff.hpp"
#include "clausevec/bench.hpp"
#include "clausevec/fol.hpp"
#include "clausevec/generator.hpp"
#include "clausevec/gnn.hpp"
#include "clausevec/patterns.hpp"
#include "clausevec/train.hpp"

using namespace clausevec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumeric = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open input file '" + path + "'", 0, 0);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct CorpusOptions {
    std::vector<std::string> inputs;
    std::string include_root;
    int generate_count = 0;  // > 0: use the generator instead of files
    std::string generator_config_path;
    uint64_t seed = 1;
};

std::pair<std::vector<Clause>, std::string> load_corpus(const CorpusOptions& opt) {
    if (opt.generate_count > 0) {
        GeneratorConfig cfg;
        if (!opt.generator_config_path.empty())
            cfg = GeneratorConfig::from_json(read_file(opt.generator_config_path));
        cfg.num_clauses = opt.generate_count;
        Problem problem = generate_random_clauses(opt.seed, cfg);
        return {std::move(problem.clauses),
                "generated(seed=" + std::to_string(opt.seed) +
                    ",n=" + std::to_string(opt.generate_count) + ")"};
    }
    if (opt.inputs.empty()) throw ConfigError("no input files (or --generate) given");
    ParseOptions popts;
    if (!opt.include_root.empty()) popts.include_root = opt.include_root;
    std::vector<Clause> clauses;
    std::string id;
    for (const auto& path : opt.inputs) {
        Problem problem = parse_cnf_problem(read_file(path), popts);
        for (auto& clause : problem.clauses) clauses.push_back(std::move(clause));
        if (!id.empty()) id += "+";
        id += std::filesystem::path(path).filename().string();
    }
    return {std::move(clauses), std::move(id)};
}

std::vector<EncoderKind> parse_encoder_list(const std::string& spec) {
    std::vector<EncoderKind> kinds;
    if (spec == "all") {
        for (const char* name : {"term_walks", "chain_patterns", "gcn", "boc_gcn", "rgcn",
                                 "mpnn", "glstm_mpnn"})
            kinds.push_back(encoder_kind_from_string(name));
        return kinds;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) kinds.push_back(encoder_kind_from_string(item));
    if (kinds.empty()) throw ConfigError("empty encoder list");
    return kinds;
}

EncoderConfig make_encoder_config(EncoderKind kind, const std::string& config_path, int dim,
                                  int rounds) {
    EncoderConfig cfg = config_path.empty()
                            ? EncoderConfig::defaults_for(kind)
                            : EncoderConfig::from_json(read_file(config_path), kind);
    if (dim > 0) cfg.d = dim;
    if (rounds >= 0) cfg.rounds = rounds;
    return cfg;
}

template <class Fn>
decltype(auto) with_scalar(const std::string& mode, Fn&& fn) {
    if (mode == "f32") return fn(float{});
    if (mode == "f64") return fn(double{});
    throw ConfigError("--float must be f32 or f64");
}

// --- vectorize -----------------------------------------------------------------

struct VectorizeArgs {
    CorpusOptions corpus;
    std::string encoder;
    std::string format = "json";
    std::string output;
    std::string config_path;
    std::string float_mode = "f32";
    std::string walk_mode = "hashed";
    int dim = 0;
    int rounds = -1;
    int threads = 1;
};

template <class S>
std::vector<FeatureVector> vectorize_clauses(const std::vector<Clause>& clauses,
                                             EncoderKind kind, const EncoderConfig& cfg,
                                             const PatternConfig& pcfg, uint64_t seed,
                                             int threads) {
    std::vector<FeatureVector> out(clauses.size());
    auto encode_range = [&](size_t lo, size_t hi, GnnEncoder<S>* enc) {
        for (size_t i = lo; i < hi; ++i) {
            switch (kind) {
                case EncoderKind::term_walks:
                    out[i] = encode_term_walks(clauses[i], pcfg);
                    break;
                case EncoderKind::chain_patterns:
                    out[i] = encode_chain_patterns(clauses[i], pcfg);
                    break;
                default:
                    out[i] = enc->encode(clauses[i]);
            }
        }
    };
    if (!encoder_is_gnn(kind) && threads > 1 && clauses.size() > 64) {
        // Pattern encoders are pure; split by index, results keep input order.
        std::vector<std::thread> pool;
        size_t chunk = (clauses.size() + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            size_t lo = t * chunk, hi = std::min(clauses.size(), lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(encode_range, lo, hi, nullptr);
        }
        for (auto& th : pool) th.join();
    } else if (encoder_is_gnn(kind)) {
        GnnEncoder<S> enc(kind, cfg, seed);
        encode_range(0, clauses.size(), &enc);
    } else {
        encode_range(0, clauses.size(), nullptr);
    }
    return out;
}

int cmd_vectorize(const VectorizeArgs& args) {
    auto [clauses, corpus_id] = load_corpus(args.corpus);
    EncoderKind kind = encoder_kind_from_string(args.encoder);
    EncoderConfig cfg = make_encoder_config(kind, args.config_path, args.dim, args.rounds);
    VectorFormat format = vector_format_from_string(args.format);

    PatternConfig pcfg;
    pcfg.d = cfg.d;
    if (args.walk_mode == "vocabulary") {
        pcfg.walk_mode = WalkMode::vocabulary;
        pcfg.vocabulary = build_walk_vocabulary(clauses);
    } else if (args.walk_mode != "hashed") {
        throw ConfigError("--walk-mode must be hashed or vocabulary");
    }

    std::vector<FeatureVector> vectors = with_scalar(args.float_mode, [&](auto tag) {
        using S = decltype(tag);
        return vectorize_clauses<S>(clauses, kind, cfg, pcfg, args.corpus.seed, args.threads);
    });

    std::string payload;
    if (format == VectorFormat::json)
        payload = feature_vectors_to_jsonl(vectors);
    else if (format == VectorFormat::csv)
        payload = feature_vectors_to_csv(vectors);
    else {
        auto bytes = feature_vectors_to_binary(vectors);
        payload.assign(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    }

    if (args.output.empty()) {
        std::cout << payload;
    } else {
        write_file(args.output, payload);
        std::cout << "wrote " << vectors.size() << " vectors (" << args.encoder << ", d=" << cfg.d
                  << ") from " << corpus_id << " to " << args.output << "\n";
    }
    return kExitOk;
}

// --- bench ----------------------------------------------------------------------

struct BenchArgs {
    CorpusOptions corpus;
    std::string encoders = "all";
    std::string output;
    std::string float_mode = "f32";
    int repetitions = 3;
    int dim = 0;
    int rounds = -1;
};

int cmd_bench(const BenchArgs& args) {
    auto [clauses, corpus_id] = load_corpus(args.corpus);
    std::vector<EncoderKind> kinds = parse_encoder_list(args.encoders);
    BenchOptions options;
    options.repetitions = args.repetitions;
    options.seed = args.corpus.seed;
    if (args.dim > 0) options.config.d = args.dim;
    if (args.rounds >= 0) options.config.rounds = args.rounds;

    RunReport report = with_scalar(args.float_mode, [&](auto tag) {
        using S = decltype(tag);
        return run_bench<S>(clauses, corpus_id, kinds, options);
    });

    std::cout << report_to_table(report);
    if (!args.output.empty()) {
        write_file(args.output, report_to_json(report));
        std::cout << "report written to " << args.output << "\n";
    }
    return kExitOk;
}

// --- train ----------------------------------------------------------------------

struct TrainArgs {
    CorpusOptions corpus;
    std::string encoder;
    std::string task = "contains_predicate";
    std::string predicate;
    std::string float_mode = "f32";
    std::string checkpoint;
    std::string report_path;
    std::string config_path;
    int epochs = 5;
    int dim = 0;
    int rounds = -1;
    bool freeze_encoder = false;
};

int cmd_train(const TrainArgs& args) {
    auto [clauses, corpus_id] = load_corpus(args.corpus);
    EncoderKind kind = encoder_kind_from_string(args.encoder);
    EncoderConfig cfg = make_encoder_config(kind, args.config_path, args.dim, args.rounds);

    ToyTask task;
    if (args.task == "contains_predicate") {
        task.kind = ToyTaskKind::contains_predicate;
        task.predicate = args.predicate.empty() ? pick_balanced_predicate(clauses)
                                                : args.predicate;
    } else if (args.task == "has_negative_literal") {
        task.kind = ToyTaskKind::has_negative_literal;
    } else {
        throw ConfigError("--task must be contains_predicate or has_negative_literal");
    }

    TrainOptions options;
    options.epochs = args.epochs;
    options.seed = args.corpus.seed;
    options.freeze_encoder = args.freeze_encoder;

    return with_scalar(args.float_mode, [&](auto tag) {
        using S = decltype(tag);
        ToyTrainer<S> trainer(kind, cfg, args.corpus.seed);
        TrainReport report = trainer.train_task(clauses, task, options);
        std::cout << "task: " << args.task
                  << (task.predicate.empty() ? "" : " (" + task.predicate + ")")
                  << "  corpus: " << corpus_id << "  positives: " << report.positive_fraction
                  << "\n";
        for (const auto& e : report.epochs) {
            std::printf("epoch %3d  train_loss %.6f  val_loss %.6f  val_acc %.4f\n", e.epoch,
                        e.train_loss, e.val_loss, e.val_accuracy);
        }
        std::printf("best_epoch %d  test_accuracy %.4f\n", report.best_epoch,
                    report.test_accuracy);
        if (!args.report_path.empty()) write_file(args.report_path, report.to_json() + "\n");
        if (!args.checkpoint.empty()) {
            save_checkpoint(trainer.params(), args.checkpoint);
            std::cout << "checkpoint written to " << args.checkpoint << ".{json,bin}\n";
        }
        return kExitOk;
    });
}

// --- gradcheck ------------------------------------------------------------------

struct GradcheckArgs {
    std::string encoders = "all";
    uint64_t seed = 1;
    int clauses = 25;
    int dim = 0;
    int rounds = -1;
    std::string config_path;
};

int cmd_gradcheck(const GradcheckArgs& args) {
    std::vector<EncoderKind> kinds = parse_encoder_list(args.encoders);
    GeneratorConfig gen;
    gen.num_clauses = args.clauses;
    gen.max_literals = 3;
    gen.max_term_depth = 2;
    Problem problem = generate_random_clauses(args.seed, gen);

    bool failed = false;
    for (EncoderKind kind : kinds) {
        if (!encoder_is_gnn(kind)) {
            std::printf("%-12s skipped (count features, not differentiable)\n",
                        encoder_kind_name(kind));
            continue;
        }
        EncoderConfig cfg = make_encoder_config(kind, args.config_path, args.dim, args.rounds);
        GnnEncoder<double> encoder(kind, cfg, args.seed);
        double worst = 0;
        for (const auto& clause : problem.clauses) {
            FormulaGraph graph = encoder.build_graph(clause);
            GradcheckOptions opt;
            opt.seed = args.seed;
            GradcheckResult r = gradcheck(
                encoder.params(),
                [&](Tape<double>& tape, ParamStore<double>&) {
                    return tape.sum_all(encoder.encode_on_tape(tape, graph));
                },
                opt);
            worst = std::max(worst, r.max_rel_err);
        }
        bool ok = worst < 1e-4;
        failed = failed || !ok;
        std::printf("%-12s max_rel_err %.3e over %d clauses  [%s]\n",
                    encoder_kind_name(kind), worst, args.clauses, ok ? "ok" : "FAIL");
    }
    return failed ? kExitNumeric : kExitOk;
}

// --- generate -------------------------------------------------------------------

struct GenerateArgs {
    uint64_t seed = 1;
    int count = 0;
    std::string config_path;
    std::string output;
};

int cmd_generate(const GenerateArgs& args) {
    GeneratorConfig cfg;
    if (!args.config_path.empty())
        cfg = GeneratorConfig::from_json(read_file(args.config_path));
    if (args.count > 0) cfg.num_clauses = args.count;
    Problem problem = generate_random_clauses(args.seed, cfg);
    std::string text = problem_to_string(problem);
    if (args.output.empty()) {
        std::cout << text;
    } else {
        write_file(args.output, text);
        std::cout << "wrote " << problem.clauses.size() << " clauses to " << args.output
                  << "\n";
    }
    return kExitOk;
}

void add_corpus_options(CLI::App* cmd, CorpusOptions& corpus, bool allow_generate) {
    cmd->add_option("inputs", corpus.inputs, "TPTP CNF input files");
    cmd->add_option("--include-root", corpus.include_root,
                    "directory for resolving include(...) directives");
    cmd->add_option("--seed", corpus.seed, "random seed");
    if (allow_generate) {
        cmd->add_option("--generate", corpus.generate_count,
                        "generate this many clauses instead of reading files");
        cmd->add_option("--gen-config", corpus.generator_config_path,
                        "generator config JSON file");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"first-order clause vectorization: pattern and GNN encoders"};
    app.require_subcommand(1);

    VectorizeArgs vec;
    auto* vectorize = app.add_subcommand("vectorize", "encode clauses into vectors");
    add_corpus_options(vectorize, vec.corpus, true);
    vectorize->add_option("--encoder", vec.encoder, "encoder name")->required();
    vectorize->add_option("--dim", vec.dim, "embedding dimension d");
    vectorize->add_option("--rounds", vec.rounds, "message-passing rounds");
    vectorize->add_option("--format", vec.format, "json, csv or bin");
    vectorize->add_option("--output", vec.output, "output path (stdout when omitted)");
    vectorize->add_option("--config", vec.config_path, "encoder config JSON file");
    vectorize->add_option("--float", vec.float_mode, "f32 or f64");
    vectorize->add_option("--walk-mode", vec.walk_mode, "hashed or vocabulary");
    vectorize->add_option("--threads", vec.threads, "worker threads (pattern encoders)");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "benchmark per-clause encoder latency");
    add_corpus_options(bench_cmd, bench.corpus, true);
    bench_cmd->add_option("--encoders", bench.encoders, "comma list or 'all'");
    bench_cmd->add_option("--repetitions", bench.repetitions, "repetitions (first discarded)");
    bench_cmd->add_option("--dim", bench.dim, "embedding dimension d");
    bench_cmd->add_option("--rounds", bench.rounds, "message-passing rounds");
    bench_cmd->add_option("--output", bench.output, "JSON report path");
    bench_cmd->add_option("--float", bench.float_mode, "f32 or f64");

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "train an encoder on a toy task");
    add_corpus_options(train_cmd, train.corpus, true);
    train_cmd->add_option("--encoder", train.encoder, "encoder name")->required();
    train_cmd->add_option("--task", train.task,
                          "contains_predicate or has_negative_literal");
    train_cmd->add_option("--predicate", train.predicate,
                          "predicate for contains_predicate (default: most balanced)");
    train_cmd->add_option("--epochs", train.epochs, "training epochs");
    train_cmd->add_option("--dim", train.dim, "embedding dimension d");
    train_cmd->add_option("--rounds", train.rounds, "message-passing rounds");
    train_cmd->add_option("--float", train.float_mode, "f32 or f64");
    train_cmd->add_option("--config", train.config_path, "encoder config JSON file");
    train_cmd->add_option("--checkpoint", train.checkpoint, "checkpoint path prefix");
    train_cmd->add_option("--report", train.report_path, "metrics report JSON path");
    train_cmd->add_flag("--freeze-encoder", train.freeze_encoder,
                        "train only the classification head");

    GradcheckArgs gc;
    auto* gc_cmd = app.add_subcommand("gradcheck",
                                      "finite-difference check of encoder gradients (f64)");
    gc_cmd->add_option("--encoder", gc.encoders, "encoder name, comma list or 'all'");
    gc_cmd->add_option("--seed", gc.seed, "random seed");
    gc_cmd->add_option("--clauses", gc.clauses, "number of generated clauses");
    gc_cmd->add_option("--dim", gc.dim, "embedding dimension d");
    gc_cmd->add_option("--rounds", gc.rounds, "message-passing rounds");
    gc_cmd->add_option("--config", gc.config_path, "encoder config JSON file");

    GenerateArgs gen;
    auto* gen_cmd = app.add_subcommand("generate", "generate a random CNF corpus");
    gen_cmd->add_option("--seed", gen.seed, "random seed");
    gen_cmd->add_option("--clauses", gen.count, "clause count override");
    gen_cmd->add_option("--config", gen.config_path, "generator config JSON file");
    gen_cmd->add_option("--output", gen.output, "output path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*vectorize) return cmd_vectorize(vec);
        if (*bench_cmd) return cmd_bench(bench);
        if (*train_cmd) return cmd_train(train);
        if (*gc_cmd) return cmd_gradcheck(gc);
        if (*gen_cmd) return cmd_generate(gen);
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ShapeError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitConfig;
}
