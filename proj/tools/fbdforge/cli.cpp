#include "fbdforge/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbdforge/action_model.hpp"
#include "fbdforge/corpus_io.hpp"
#include "fbdforge/errors.hpp"
#include "fbdforge/federation.hpp"
#include "fbdforge/fiona.hpp"
#include "fbdforge/requirements.hpp"
#include "fbdforge/service.hpp"
#include "fbdforge/transition_table.hpp"

namespace fbdforge::cli {
namespace {

namespace fs = std::filesystem;

constexpr int kDataError = 1;
constexpr int kUsageError = 2;

// Thrown for argument combinations CLI11 cannot express.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// "--prefix AND,OR" and "--prefix AND --prefix OR" are both accepted.
SymbolSeq split_symbols(const std::vector<std::string>& raw) {
    SymbolSeq out;
    for (const auto& chunk : raw) {
        std::stringstream ss(chunk);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) out.push_back(item);
        }
    }
    return out;
}

Corpus read_corpus(const std::string& path, const std::string& vocab_path) {
    if (vocab_path.empty()) return load_corpus_file(path);
    return load_corpus_file(path, load_vocabulary_file(vocab_path));
}

Smoothing make_smoothing(const std::string& mode, const std::string& alpha) {
    if (mode == "none") return {};
    if (mode != "laplace") throw UsageError("--smoothing must be none or laplace");
    auto slash = alpha.find('/');
    Rational a = slash == std::string::npos
                     ? Rational(std::stoll(alpha))
                     : Rational(std::stoll(alpha.substr(0, slash)), std::stoll(alpha.substr(slash + 1)));
    return Smoothing::laplace(a);
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw Error("cannot write '" + path.string() + "'");
    os << content;
}

struct SpecFlags {
    std::string backend = "count";
    std::size_t hidden = 50;
    std::size_t embedding = 16;
    std::size_t epochs = 50;
    double lr = 0.05;
    std::size_t batch = 16;
    std::uint64_t seed = 0;
    double context_weight = 0.5;

    void attach(CLI::App* app) {
        app->add_option("--backend", backend, "Model backend: count or rnn")
            ->check(CLI::IsMember({"count", "rnn"}))
            ->capture_default_str();
        app->add_option("--hidden", hidden, "LSTM cells")->capture_default_str();
        app->add_option("--embedding", embedding, "Symbol embedding width")->capture_default_str();
        app->add_option("--epochs", epochs, "Training epochs per phase")->capture_default_str();
        app->add_option("--lr", lr, "Learning rate")->capture_default_str();
        app->add_option("--batch", batch, "Mini-batch size")->capture_default_str();
        app->add_option("--seed", seed, "Initialization and shuffling seed")->capture_default_str();
        app->add_option("--context-weight", context_weight, "Sample weight of context data")->capture_default_str();
    }

    ActionModelSpec spec() const {
        ActionModelSpec s;
        s.backend = parse_backend(backend);
        s.hidden_size = hidden;
        s.embedding_dim = embedding;
        s.epochs = epochs;
        s.learning_rate = lr;
        s.batch_size = batch;
        s.init_seed = seed;
        s.context_weight = context_weight;
        return s;
    }
};

std::vector<TransitionDataset> context_datasets(const std::string& path, const Vocabulary& vocab,
                                                std::size_t max_steps) {
    std::vector<TransitionDataset> out;
    if (path.empty()) return out;
    const auto synthetic = load_corpus_file(path, vocab);
    for (std::size_t t = 1; t <= max_steps; ++t) {
        auto ds = slice_transitions(synthetic, DesignStep(t), DataSource::fiona_context);
        if (!ds.empty()) out.push_back(std::move(ds));
    }
    return out;
}

std::size_t default_steps(const Corpus& corpus) { return std::max<std::size_t>(1, corpus.max_length() - 1); }

int cmd_ingest(const std::string& corpus_path, const std::string& vocab_path, const std::string& out_dir,
               const Smoothing& smoothing, bool backoff, std::ostream& out) {
    const auto corpus = read_corpus(corpus_path, vocab_path);
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    {
        std::ostringstream os;
        write_corpus(os, corpus);
        write_file(dir / "corpus.jsonl", os.str());
    }
    {
        std::ostringstream os;
        write_vocabulary(os, corpus.vocabulary());
        write_file(dir / "vocabulary.json", os.str());
    }
    {
        std::ostringstream os;
        save_table(os, build_table(corpus, smoothing, backoff));
        write_file(dir / "table.json", os.str());
    }
    out << "programs=" << corpus.size() << " symbols=" << corpus.vocabulary().size()
        << " max_length=" << corpus.max_length() << '\n';
    return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& vocab_path, const std::string& context_path,
              const std::string& out_dir, std::size_t steps, std::size_t single_step, const SpecFlags& flags,
              std::ostream& out) {
    const auto corpus = read_corpus(corpus_path, vocab_path);
    const auto spec = flags.spec();
    const fs::path dir(out_dir);

    if (single_step > 0) {
        auto task = slice_transitions(corpus, DesignStep(single_step));
        if (task.empty()) throw Error("corpus has no step-" + std::to_string(single_step) + " transitions");
        auto contexts = context_datasets(context_path, corpus.vocabulary(), single_step);
        const TransitionDataset* ctx = nullptr;
        for (const auto& c : contexts) {
            if (c.step.value() == single_step) ctx = &c;
        }
        auto result = train(spec, corpus.vocabulary(), task, ctx);
        const auto stem = "step-" + std::to_string(single_step);
        std::ostringstream model;
        save_model(model, result.model);
        write_file(dir / (stem + ".json"), model.str());
        write_file(dir / (stem + ".surface.csv"), export_error_surface(result.surface));
        if (result.pretraining_surface)
            write_file(dir / (stem + ".pretrain.surface.csv"), export_error_surface(*result.pretraining_surface));
        out << "step=" << single_step << " items=" << task.size()
            << " final_loss=" << fixed(result.surface.final_epoch_mean(), 6) << '\n';
        return 0;
    }

    const std::size_t n = steps > 0 ? steps : default_steps(corpus);
    auto fed = train_federation(corpus, context_datasets(context_path, corpus.vocabulary(), n), spec, n);
    save_federation(fed, dir);
    out << "federation steps=" << fed.max_steps() << " backend=" << to_string(fed.backend()) << " -> "
        << dir.string() << '\n';
    return 0;
}

int cmd_fiona(const std::string& corpus_path, const std::string& vocab_path, const std::string& schedule_path,
              std::size_t n, std::size_t max_len, std::uint64_t seed, const std::string& mode,
              const std::string& out_path, std::ostream& out) {
    std::optional<Vocabulary> vocab;
    SymbolDistribution prior;
    if (!corpus_path.empty()) {
        const auto corpus = read_corpus(corpus_path, vocab_path);
        vocab = corpus.vocabulary();
        prior = estimate_prior(corpus).to_double();
    } else if (!vocab_path.empty()) {
        vocab = load_vocabulary_file(vocab_path);
        prior = SymbolDistribution::uniform(*vocab);
    } else {
        throw UsageError("fiona-dataset needs --corpus or --vocabulary");
    }
    fiona::ExclusionSchedule schedule;
    if (!schedule_path.empty()) {
        std::ifstream in(schedule_path);
        if (!in) throw Error("cannot open schedule '" + schedule_path + "'");
        schedule = fiona::load_schedule(in);
    }
    fiona::ContextDatasetOptions opts{n, max_len, seed,
                                      mode == "free" ? fiona::DraftMode::free : fiona::DraftMode::chained};
    auto ds = fiona::build_context_dataset(*vocab, schedule, prior, opts);
    std::ostringstream os;
    for (const auto& p : ds.programs) os << program_to_line(p) << '\n';
    if (out_path.empty() || out_path == "-") {
        out << os.str();
    } else {
        write_file(out_path, os.str());
    }
    return 0;
}

int cmd_recommend(const std::string& corpus_path, const std::string& vocab_path, const std::string& artifacts,
                  const std::vector<std::string>& prefix_raw, std::size_t k, const Smoothing& smoothing,
                  bool backoff, std::ostream& out) {
    std::string path = corpus_path;
    if (path.empty()) path = (fs::path(artifacts) / "corpus.jsonl").string();
    const auto corpus = read_corpus(path, vocab_path);
    TransitionTable table;
    if (!artifacts.empty()) {
        std::ifstream in(fs::path(artifacts) / "table.json");
        if (!in) throw Error("no table.json in '" + artifacts + "'");
        table = load_table(in).with_options(smoothing, backoff);
    } else {
        table = build_table(corpus, smoothing, backoff);
    }
    const auto rec = recommend(table, estimate_prior(corpus), split_symbols(prefix_raw), k);
    for (const auto& [symbol, p] : rec.entries) out << symbol << ' ' << fixed(to_double(p), 4) << '\n';
    return 0;
}

int cmd_generate(const std::string& corpus_path, const std::string& vocab_path, const std::string& fed_dir,
                 const std::string& req_path, const std::string& rules_path, bool lenient,
                 const std::vector<std::string>& prefix_raw, const std::string& mode, std::uint64_t seed,
                 std::size_t max_steps, std::size_t count, const SpecFlags& flags, std::ostream& out,
                 std::ostream& err) {
    std::optional<Federation> fed;
    if (!fed_dir.empty()) {
        fed = load_federation(fed_dir);
    } else if (!corpus_path.empty()) {
        const auto corpus = read_corpus(corpus_path, vocab_path);
        fed = train_federation(corpus, {}, flags.spec(), default_steps(corpus));
    } else {
        throw UsageError("generate needs --corpus or --federation");
    }

    GenerationConfig cfg;
    cfg.mode = mode == "sample" ? GenerationMode::sample : GenerationMode::argmax;
    cfg.max_steps = max_steps > 0 ? max_steps : fed->max_steps() + 1;
    cfg.prefix = split_symbols(prefix_raw);
    if (req_path.empty() != rules_path.empty()) throw UsageError("--requirements and --rules go together");
    if (!req_path.empty()) {
        const auto doc = parse_requirements_file(req_path);
        const auto rules = parse_rules_file(rules_path);
        rules.check_against(fed->vocabulary());
        auto derived = derive_multiset(doc, rules, !lenient);
        for (const auto& u : derived.unmapped) err << "warning: no mapping rule for entity type '" << u << "'\n";
        cfg.budget = std::move(derived.multiset);
    }
    for (std::size_t i = 0; i < count; ++i) {
        cfg.seed = seed + i;
        auto program = generate(*fed, cfg);
        if (count > 1) program.id += "-" + std::to_string(i);
        out << program_to_line(program) << '\n';
    }
    return 0;
}

int cmd_eval(const std::string& corpus_path, const std::string& fed_dir, const std::string& held_out_path,
             std::size_t k, const SpecFlags& flags, std::ostream& out) {
    std::optional<Federation> fed;
    if (!fed_dir.empty()) {
        fed = load_federation(fed_dir);
    } else if (!corpus_path.empty()) {
        const auto corpus = load_corpus_file(corpus_path);
        fed = train_federation(corpus, {}, flags.spec(), default_steps(corpus));
    } else {
        throw UsageError("eval needs --corpus or --federation");
    }
    const std::string held = held_out_path.empty() ? corpus_path : held_out_path;
    if (held.empty()) throw UsageError("eval needs --held-out");
    const auto held_out = load_corpus_file(held, fed->vocabulary());
    out << "step,samples,top1,top" << k << ",mean_nll\n";
    for (const auto& m : evaluate_federation(*fed, held_out, k)) {
        out << m.step << ',' << m.samples << ',' << fixed(m.top1, 4) << ',' << fixed(m.topk, 4) << ','
            << fixed(m.mean_nll, 4) << '\n';
    }
    return 0;
}

int cmd_gradcheck(std::size_t hidden, std::size_t embedding, double epsilon, std::uint64_t seed, std::size_t items,
                  std::ostream& out) {
    const auto vocab = Vocabulary::from_names({"A", "B", "C", "D"});
    TransitionDataset sample(DesignStep(2));
    const std::vector<TransitionItem> pool = {
        {{"A", "B"}, "C"}, {{"B", "D"}, "A"}, {{"C", "C"}, "D"}, {{"D", "A"}, "B"}};
    for (std::size_t i = 0; i < items && i < pool.size(); ++i) sample.items.push_back(pool[i]);
    ActionModelSpec spec;
    spec.backend = Backend::rnn;
    spec.hidden_size = hidden;
    spec.embedding_dim = embedding;
    spec.init_seed = seed;
    const double worst = gradient_check(spec, vocab, sample, epsilon);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", worst);
    out << "max_relative_error=" << buf << (worst < 1e-3 ? " ok" : " FAIL") << '\n';
    return worst < 1e-3 ? 0 : kDataError;
}

int cmd_serve(const std::string& corpus_path, const std::string& fed_dir, const std::string& listen,
              const std::string& log_path, const Smoothing& smoothing, bool backoff, std::ostream& out) {
    service::ServiceConfig cfg;
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw UsageError("--listen must be host:port");
    cfg.host = listen.substr(0, colon);
    try {
        cfg.port = std::stoi(listen.substr(colon + 1));
    } catch (const std::exception&) {
        throw UsageError("--listen must be host:port");
    }
    if (!corpus_path.empty()) cfg.corpus_path = corpus_path;
    if (!fed_dir.empty()) cfg.federation_path = fed_dir;
    if (!log_path.empty()) cfg.request_log_path = log_path;
    cfg.smoothing = smoothing;
    cfg.backoff = backoff;
    cfg.validate();

    service::Service svc(cfg, service::load_snapshot(cfg));
    const int port = svc.start();
    out << "listening on " << cfg.host << ':' << port << std::endl;
    g_stop = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
    svc.stop();
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"fbdforge: next-block recommendation and FBD program generation"};
    app.name("fbdforge");
    app.require_subcommand(1);

    std::string corpus, vocab, out_path, context, federation, table_dir, schedule, requirements, rules, mode,
        smoothing_mode = "none", alpha = "1", held_out, listen = "127.0.0.1:8080", log_path, draft_mode = "chained";
    std::vector<std::string> prefix;
    std::size_t k = 3, steps = 0, single_step = 0, n = 0, max_len = 4, max_steps = 0, count = 1;
    std::size_t hidden = 5, embedding = 3, items = 2;
    double epsilon = 1e-4;
    std::uint64_t seed = 0;
    bool no_backoff = false, lenient = false;
    SpecFlags spec_flags;

    auto add_smoothing = [&](CLI::App* sub) {
        sub->add_option("--smoothing", smoothing_mode, "none or laplace")
            ->check(CLI::IsMember({"none", "laplace"}))
            ->capture_default_str();
        sub->add_option("--alpha", alpha, "Laplace pseudo-count, integer or p/q")->capture_default_str();
        sub->add_flag("--no-backoff", no_backoff, "Fail on unseen prefixes instead of backing off");
    };

    auto* ingest = app.add_subcommand("ingest", "Validate a corpus and write normalized artifacts");
    ingest->add_option("--corpus", corpus, "Corpus JSONL")->required();
    ingest->add_option("--vocabulary", vocab, "Vocabulary JSON");
    ingest->add_option("--out", out_path, "Artifact directory")->required();
    add_smoothing(ingest);

    auto* train_cmd = app.add_subcommand("train", "Train a federation or a single step model");
    train_cmd->add_option("--corpus", corpus, "Corpus JSONL")->required();
    train_cmd->add_option("--vocabulary", vocab, "Vocabulary JSON");
    train_cmd->add_option("--context", context, "FIONA context programs (JSONL)");
    train_cmd->add_option("--out", out_path, "Output directory")->required();
    train_cmd->add_option("--steps", steps, "Federation size N (default: longest program - 1)");
    train_cmd->add_option("--step", single_step, "Train only this design step and export its error surface");
    spec_flags.attach(train_cmd);

    auto* fiona_cmd = app.add_subcommand("fiona-dataset", "Synthesize FIONA context programs");
    fiona_cmd->add_option("--corpus", corpus, "Corpus whose symbol frequencies weight the pairs");
    fiona_cmd->add_option("--vocabulary", vocab, "Vocabulary JSON (uniform weights without --corpus)");
    fiona_cmd->add_option("--schedule", schedule, "Exclusion schedule JSON");
    fiona_cmd->add_option("--n", n, "Number of sequences")->required();
    fiona_cmd->add_option("--max-len", max_len, "Sequence length")->capture_default_str();
    fiona_cmd->add_option("--seed", seed, "Seed")->capture_default_str();
    fiona_cmd->add_option("--mode", draft_mode, "chained or free")
        ->check(CLI::IsMember({"chained", "free"}))
        ->capture_default_str();
    fiona_cmd->add_option("--out", out_path, "Output JSONL (default stdout)");

    auto* rec_cmd = app.add_subcommand("recommend", "Rank next symbols for a design prefix");
    rec_cmd->add_option("--corpus", corpus, "Corpus JSONL");
    rec_cmd->add_option("--vocabulary", vocab, "Vocabulary JSON");
    rec_cmd->add_option("--artifacts", table_dir, "Directory written by ingest");
    rec_cmd->add_option("--prefix", prefix, "Prefix symbols (comma separated or repeated)");
    rec_cmd->add_option("--k", k, "Number of alternatives")->capture_default_str();
    add_smoothing(rec_cmd);

    auto* gen_cmd = app.add_subcommand("generate", "Auto-generate programs from a federation");
    gen_cmd->add_option("--corpus", corpus, "Corpus JSONL (trains a federation on the fly)");
    gen_cmd->add_option("--vocabulary", vocab, "Vocabulary JSON");
    gen_cmd->add_option("--federation", federation, "Federation directory");
    gen_cmd->add_option("--requirements", requirements, "Requirements JSON");
    gen_cmd->add_option("--rules", rules, "Mapping rule table JSON");
    gen_cmd->add_flag("--lenient", lenient, "Skip entity types without a rule");
    gen_cmd->add_option("--prefix", prefix, "Symbols already placed");
    gen_cmd->add_option("--mode", mode, "argmax or sample")->check(CLI::IsMember({"argmax", "sample"}));
    gen_cmd->add_option("--max-steps", max_steps, "Maximum program length");
    gen_cmd->add_option("--count", count, "Programs to generate (seeds seed..seed+count-1)")->capture_default_str();
    spec_flags.attach(gen_cmd);

    auto* eval_cmd = app.add_subcommand("eval", "Per-step accuracy of a federation");
    eval_cmd->add_option("--federation", federation, "Federation directory");
    eval_cmd->add_option("--corpus", corpus, "Training corpus (trains a federation on the fly)");
    eval_cmd->add_option("--held-out", held_out, "Held-out corpus JSONL");
    eval_cmd->add_option("--k", k, "Top-k cutoff")->capture_default_str();
    spec_flags.attach(eval_cmd);

    auto* grad_cmd = app.add_subcommand("gradcheck", "Check LSTM gradients against finite differences");
    grad_cmd->add_option("--hidden", hidden, "LSTM cells")->capture_default_str();
    grad_cmd->add_option("--embedding", embedding, "Embedding width")->capture_default_str();
    grad_cmd->add_option("--epsilon", epsilon, "Central-difference step")->capture_default_str();
    grad_cmd->add_option("--seed", seed, "Initialization seed")->capture_default_str();
    grad_cmd->add_option("--items", items, "Sample size (1-4)")->capture_default_str();

    auto* serve_cmd = app.add_subcommand("serve", "Serve recommendations over HTTP");
    serve_cmd->add_option("--corpus", corpus, "Corpus JSONL");
    serve_cmd->add_option("--federation", federation, "Federation directory");
    serve_cmd->add_option("--listen", listen, "host:port")->capture_default_str();
    serve_cmd->add_option("--log", log_path, "Accepted-selection log (JSONL)");
    add_smoothing(serve_cmd);

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : kUsageError;
    }

    try {
        const Smoothing smoothing = make_smoothing(smoothing_mode, alpha);
        const bool backoff = !no_backoff;
        if (ingest->parsed()) return cmd_ingest(corpus, vocab, out_path, smoothing, backoff, out);
        if (train_cmd->parsed())
            return cmd_train(corpus, vocab, context, out_path, steps, single_step, spec_flags, out);
        if (fiona_cmd->parsed())
            return cmd_fiona(corpus, vocab, schedule, n, max_len, seed, draft_mode, out_path, out);
        if (rec_cmd->parsed()) {
            if (corpus.empty() && table_dir.empty()) throw UsageError("recommend needs --corpus or --artifacts");
            return cmd_recommend(corpus, vocab, table_dir, prefix, k, smoothing, backoff, out);
        }
        if (gen_cmd->parsed())
            return cmd_generate(corpus, vocab, federation, requirements, rules, lenient, prefix,
                                mode.empty() ? "argmax" : mode, spec_flags.seed, max_steps, count, spec_flags, out,
                                err);
        if (eval_cmd->parsed()) return cmd_eval(corpus, federation, held_out, k, spec_flags, out);
        if (grad_cmd->parsed()) return cmd_gradcheck(hidden, embedding, epsilon, seed, items, out);
        if (serve_cmd->parsed()) return cmd_serve(corpus, federation, listen, log_path, smoothing, backoff, out);
    } catch (const UsageError& e) {
        err << "fbdforge: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "fbdforge: " << e.what() << '\n';
        return kDataError;
    }
    return kUsageError;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return run_cli(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace fbdforge::cli
