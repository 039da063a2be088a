#include "spn/align.hpp"
#include "spn/learn.hpp"
#include "spn/neural.hpp"
#include "spn/report.hpp"
#include "spn/store.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitNoCompression = 2;
constexpr int kExitUsage = 64;

struct Config {
    std::string grammar;
    std::string input;
    std::string input_file;
    std::string corpus;
    std::size_t beam = 20;
    std::size_t max_rows = 32;
    std::size_t kept = 10;
    std::string costs;
    double theta = 0.7;
    double kappa = 0.5;
    double lambda = 0.1;
    std::size_t passes = 5;
    std::size_t array_length = 0;
    std::size_t max_ticks = 32;
    std::string out;
    std::string trace;
    bool render = false;
    std::uint64_t seed = 0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw spn::Error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw spn::Error("cannot write '" + path + "'");
}

std::optional<spn::CostMode> cost_mode(const Config& c) {
    if (c.costs.empty()) return std::nullopt;
    return c.costs == "frequency" ? spn::CostMode::Frequency : spn::CostMode::Fixed;
}

spn::Store load_grammar(const Config& c) {
    auto store = spn::parse_grammar_file(read_file(c.grammar));
    if (auto mode = cost_mode(c)) store = store.with_mode(*mode);
    auto diags = spn::validate_store(store);
    if (!diags.empty()) throw spn::Error("invalid grammar: " + diags.front().message);
    return store;
}

std::vector<std::string> load_input(const Config& c) {
    std::vector<std::string> tokens;
    if (!c.input_file.empty()) {
        for (const auto& p : spn::parse_new_file(read_file(c.input_file)))
            for (const auto& s : p.symbols) tokens.push_back(s.name);
    } else {
        tokens = spn::split_tokens(c.input);
    }
    if (tokens.empty()) throw spn::Error("input is empty");
    return tokens;
}

spn::SearchParams search_params(const Config& c) {
    spn::SearchParams p;
    p.beam_width = c.beam;
    p.max_rows = c.max_rows;
    p.max_alignments_kept = c.kept;
    return p;
}

int run_align(const Config& c, bool parse) {
    auto store = load_grammar(c);
    auto ranked = spn::build_alignments(store, spn::make_new_pattern(load_input(c)), search_params(c));
    if (parse || c.render) write_output(c.out, spn::render_report(ranked));
    else write_output(c.out, spn::alignments_jsonl(ranked));
    if (!c.trace.empty()) write_output(c.trace, spn::alignments_jsonl(ranked));
    bool compressed = ranked.front().score().cd > 0;
    return parse && !compressed ? kExitNoCompression : 0;
}

int run_produce(const Config& c) {
    auto store = load_grammar(c);
    auto code = spn::make_new_pattern(load_input(c));
    auto ranked = spn::build_alignments(store, code, search_params(c));
    if (ranked.front().is_fallback()) throw spn::Error("no alignment of the code was found");
    const spn::Store covering = spn::store_covering(store, code);
    std::string text = spn::join(spn::realize_surface(ranked.front(), covering)) + '\n';
    if (c.render) text = spn::render_report(ranked) + "\nsurface: " + text;
    write_output(c.out, text);
    if (!c.trace.empty()) write_output(c.trace, spn::alignments_jsonl(ranked));
    return 0;
}

int run_learn(const Config& c) {
    auto corpus = spn::parse_corpus(read_file(c.corpus));
    if (corpus.entries.empty()) throw spn::Error("corpus is empty");
    spn::LearnOptions options;
    options.passes = c.passes;
    if (auto mode = cost_mode(c)) options.mode = *mode;
    auto result = spn::learn(corpus, search_params(c), options);
    write_output(c.out, spn::serialize_store(result.store));
    if (!c.trace.empty()) write_output(c.trace, spn::learn_trace_jsonl(result));
    return 0;
}

spn::NeuralParams neural_params(const Config& c) {
    spn::NeuralParams p;
    p.theta = c.theta;
    p.kappa = c.kappa;
    p.lambda = c.lambda;
    p.max_ticks = c.max_ticks;
    return p;
}

int run_compile(const Config& c) {
    auto store = load_grammar(c);
    std::size_t length = c.array_length;
    if (length == 0) length = c.input.empty() && c.input_file.empty() ? 32 : load_input(c).size();
    write_output(c.out, spn::network_dump(spn::compile_network(store, length, neural_params(c))));
    return 0;
}

int run_simulate(const Config& c) {
    auto store = load_grammar(c);
    auto tokens = load_input(c);
    store = spn::store_covering(store, spn::make_new_pattern(tokens));
    auto net = spn::compile_network(store, std::max(c.array_length, tokens.size()), neural_params(c));
    auto rec = spn::recognize(net, tokens, c.max_ticks);
    std::string text;
    for (const auto& id : rec.fired) text += "fired " + id + '\n';
    text += "ticks " + std::to_string(rec.trace.size()) + '\n';
    if (c.render) {
        for (const auto& t : rec.trace) {
            text += "tick " + std::to_string(t.tick) + ':';
            for (const auto& e : t.assemblies) {
                if (e.activation <= 0 && !e.fired) continue;
                std::ostringstream v;
                v << ' ' << e.pattern_id << '=' << e.activation << (e.fired ? "*" : "");
                text += v.str();
            }
            text += '\n';
        }
    }
    write_output(c.out, text);
    if (!c.trace.empty()) write_output(c.trace, spn::tick_trace_jsonl(rec));
    return 0;
}

int run_sample(const Config& c) {
    auto corpus = spn::random_corpus(c.seed);
    std::string text;
    for (const auto& p : corpus.entries) text += spn::join(p.names()) + '\n';
    write_output(c.out, text);
    return 0;
}

void add_search_flags(CLI::App* app, Config& c) {
    app->add_option("--beam", c.beam, "Beam width")->check(CLI::PositiveNumber);
    app->add_option("--max-rows", c.max_rows, "Most Old rows in one alignment")->check(CLI::PositiveNumber);
    app->add_option("--kept", c.kept, "Alignments reported")->check(CLI::PositiveNumber);
    app->add_option("--costs", c.costs, "Cost model")->check(CLI::IsMember({"fixed", "frequency"}));
}

void add_input_flags(CLI::App* app, Config& c, bool required) {
    auto* in = app->add_option("--input", c.input, "Tokens separated by spaces");
    auto* file = app->add_option("--input-file", c.input_file, "File holding the tokens")->check(CLI::ExistingFile);
    in->excludes(file);
    file->excludes(in);
    if (required) {
        auto* group = app->add_option_group("input");
        group->add_option(in);
        group->add_option(file);
        group->require_option(1);
    }
}

void add_neural_flags(CLI::App* app, Config& c) {
    auto unit = CLI::Validator(
        [](std::string& s) -> std::string {
            try {
                double v = std::stod(s);
                if (v > 0 && v <= 1) return {};
            } catch (const std::exception&) {
            }
            return "must be a number in (0, 1]";
        },
        "(0,1]");
    app->add_option("--theta", c.theta, "Ignition threshold")->check(unit);
    app->add_option("--kappa", c.kappa, "Coherence bonus")->check(CLI::NonNegativeNumber);
    app->add_option("--lambda", c.lambda, "Frequency gain")->check(CLI::NonNegativeNumber);
    app->add_option("--array-length", c.array_length, "Receptor array locations");
    app->add_option("--max-ticks", c.max_ticks, "Tick limit")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pattern alignment, learning and neural recognition"};
    app.require_subcommand(1);
    Config c;

    auto grammar = [&](CLI::App* sub) {
        sub->add_option("--grammar", c.grammar, "Grammar file")->required()->check(CLI::ExistingFile);
    };
    auto outputs = [&](CLI::App* sub, bool render) {
        sub->add_option("--out", c.out, "Output file (default stdout)");
        sub->add_option("--trace", c.trace, "Trace file (JSON lines)");
        if (render) sub->add_flag("--render", c.render, "Human-readable output");
    };

    auto* align = app.add_subcommand("align", "Rank alignments of one New pattern (JSON lines)");
    grammar(align);
    add_input_flags(align, c, true);
    add_search_flags(align, c);
    outputs(align, true);

    auto* parse = app.add_subcommand("parse", "Report the best alignments of one New pattern");
    grammar(parse);
    add_input_flags(parse, c, true);
    add_search_flags(parse, c);
    outputs(parse, true);

    auto* produce = app.add_subcommand("produce", "Recreate a surface sequence from a code");
    grammar(produce);
    add_input_flags(produce, c, true);
    add_search_flags(produce, c);
    outputs(produce, true);

    auto* learn = app.add_subcommand("learn", "Learn a grammar from a corpus");
    learn->add_option("--corpus", c.corpus, "Corpus file, one sentence per line")->required()->check(CLI::ExistingFile);
    learn->add_option("--passes", c.passes, "Pass limit")->check(CLI::PositiveNumber);
    add_search_flags(learn, c);
    outputs(learn, false);

    auto* compile = app.add_subcommand("compile-neural", "Compile a grammar into a network dump");
    grammar(compile);
    add_input_flags(compile, c, false);
    add_neural_flags(compile, c);
    outputs(compile, false);

    auto* simulate = app.add_subcommand("simulate", "Recognize an input with the compiled network");
    grammar(simulate);
    add_input_flags(simulate, c, true);
    add_neural_flags(simulate, c);
    outputs(simulate, true);

    auto* sample = app.add_subcommand("sample-corpus", "Write a seeded random corpus");
    sample->add_option("--seed", c.seed, "Seed for the random generator");
    outputs(sample, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (align->parsed()) return run_align(c, false);
        if (parse->parsed()) return run_align(c, true);
        if (produce->parsed()) return run_produce(c);
        if (learn->parsed()) return run_learn(c);
        if (compile->parsed()) return run_compile(c);
        if (simulate->parsed()) return run_simulate(c);
        if (sample->parsed()) return run_sample(c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
