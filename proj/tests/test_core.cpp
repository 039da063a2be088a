#include "support/support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace spn;
using spn::testing::load_fixture;

namespace {

// Frozen from tests/oracles/tally_costs.py run on fixtures/sentence.sp.
constexpr double kSentenceGrammarTotalCount = 61;
constexpr double kSentenceGrammarCostLt = 2.345774836842;
constexpr double kSentenceGrammarCostSng = 5.930737337563;
constexpr double kSentenceGrammarCostE = 4.345774836842;
constexpr double kSentenceGrammarSentenceBits = 62.413960548591;
constexpr double kSentenceGrammarCodeBits = 29.653686687814;
constexpr double kSentenceGrammarGrammarBits = 246.980990071865;

Store random_store(std::mt19937& rng) {
    auto pick = [&](int k) { return std::uniform_int_distribution<int>(0, k - 1)(rng); };
    const std::vector<std::string> names = {"a", "b", "c", "<", ">", "X", "Y", "0", "1", "long-token"};
    std::vector<Pattern> pats;
    const int n = pick(5);
    for (int k = 0; k < n; ++k) {
        Pattern p;
        p.id = "q" + std::to_string(k);
        p.frequency = 1 + pick(9);
        p.origin = static_cast<Origin>(pick(3));
        const int len = 1 + pick(6);
        for (int i = 0; i < len; ++i)
            p.symbols.push_back({names[pick(static_cast<int>(names.size()))], pick(2) ? Role::Id : Role::Content});
        p.symbols[0].role = Role::Id;
        pats.push_back(std::move(p));
    }
    StoreOptions opts;
    opts.mode = pick(2) ? CostMode::Frequency : CostMode::Fixed;
    if (opts.mode == CostMode::Fixed && pick(2)) opts.fixed_bits = 1 + pick(7);
    if (pick(2)) opts.extra_alphabet = {"zz", "yy"};
    return Store(std::move(pats), opts);
}

} // namespace

TEST_SUITE("core") {

TEST_CASE("grammar line with ids and contents") {
    auto st = parse_grammar_file("np 1: </I NP/I </C D/C >/C </C N/C >/C >/I\n");
    REQUIRE(st.size() == 1);
    const auto& p = st.patterns().front();
    CHECK(join(p.names()) == "< NP < D > < N > >");
    CHECK(p.symbols[0].role == Role::Id);
    CHECK(p.symbols[1].role == Role::Id);
    CHECK(p.symbols[2].role == Role::Content);
    CHECK(p.symbols[8].role == Role::Id);
    CHECK(p.frequency == 1);
}

TEST_CASE("pattern lines without an id get generated ids") {
    auto st = parse_grammar_file("1: </I NP/I >/I\n3 : x/I\n");
    REQUIRE(st.size() == 2);
    CHECK(st.find("p1") != nullptr);
    CHECK(st.find("p2")->frequency == 3);
}

TEST_CASE("empty file gives an empty store") {
    auto st = parse_grammar_file("");
    CHECK(st.empty());
    CHECK(st.alphabet().empty());
}

TEST_CASE("syntax errors carry the line number") {
    auto line_of = [](const std::string& text) {
        try {
            parse_grammar_file(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return std::size_t{0};
    };
    CHECK(line_of("# ok\nx 1 : a/b/I\n") == 2);
    CHECK(line_of("x 1 : a/I\nx 1 : b/I\n") == 2);
    CHECK(line_of("x 1 : a/C b/C\n") == 1);
    CHECK(line_of("x 0 : a/I\n") == 1);
    CHECK(line_of("x 1 a/I\n") == 1);
    CHECK(line_of("x 1 : a/Z\n") == 1);
    CHECK(line_of("#costs weird\n") == 1);
}

TEST_CASE("tokens") {
    CHECK(is_valid_token("cat"));
    CHECK_FALSE(is_valid_token(""));
    CHECK_FALSE(is_valid_token("a/b"));
    CHECK_FALSE(is_valid_token("a b"));
    CHECK(split_tokens("  t h\te  ") == std::vector<std::string>{"t", "h", "e"});
    auto p = parse_new_pattern("t h e");
    CHECK(p.is_new());
    for (const auto& s : p.symbols) CHECK(s.role == Role::Data);
    CHECK_THROWS_AS(make_new_pattern({"a/b"}), ParseError);
}

TEST_CASE("fixed costs") {
    std::vector<Pattern> pats;
    Pattern p;
    p.id = "wide";
    for (int i = 0; i < 32; ++i) p.symbols.push_back({"s" + std::to_string(i), Role::Id});
    pats.push_back(p);
    Store st(pats);
    CHECK(st.alphabet().size() == 32);
    CHECK(symbol_cost(st, "s0") == 5);
    CHECK(symbol_cost(st, "s31") == 5);

    StoreOptions five;
    five.fixed_bits = 5;
    Store st5({}, five);
    st5 = st5.with_extra_tokens({"t", "h", "e"});
    std::vector<std::string> the = {"t", "h", "e"};
    CHECK(pattern_size_bits(st5, std::span<const std::string>(the)) == 15);
    CHECK(pattern_size_bits(st5, std::span<const std::string>()) == 0);
    CHECK_THROWS_AS(symbol_cost(st5, "zz"), UnknownTokenError);
}

TEST_CASE("frequency costs") {
    auto st = parse_grammar_file("#costs frequency\nx 2 : a/I b/C\ny 1 : a/I a/C\n");
    // a: 2 + 2 = 4 of 6, b: 2 of 6
    CHECK(symbol_cost(st, "a") == doctest::Approx(-std::log2(4.0 / 6)));
    CHECK(symbol_cost(st, "b") == doctest::Approx(-std::log2(2.0 / 6)));
    auto half = parse_grammar_file("#costs frequency\nx 1 : a/I b/C c/C a/C\n");
    CHECK(symbol_cost(half, "a") == doctest::Approx(1.0));
}

TEST_CASE("frequency costs on the sentence grammar match the tally script") {
    auto st = load_fixture("sentence.sp").with_mode(CostMode::Frequency);
    CHECK(st.cost_model().total_count() == kSentenceGrammarTotalCount);
    CHECK(symbol_cost(st, "<") == doctest::Approx(kSentenceGrammarCostLt).epsilon(1e-12));
    CHECK(symbol_cost(st, "SNG") == doctest::Approx(kSentenceGrammarCostSng).epsilon(1e-12));
    CHECK(symbol_cost(st, "e") == doctest::Approx(kSentenceGrammarCostE).epsilon(1e-12));
    auto sentence = split_tokens("t h e c a t s l e e p s");
    CHECK(pattern_size_bits(st, std::span<const std::string>(sentence)) ==
          doctest::Approx(kSentenceGrammarSentenceBits).epsilon(1e-12));
    auto code = split_tokens("S SNG 0 3 2");
    CHECK(pattern_size_bits(st, std::span<const std::string>(code)) == doctest::Approx(kSentenceGrammarCodeBits).epsilon(1e-12));
}

TEST_CASE("validation") {
    CHECK(validate_store(load_fixture("sentence.sp")).empty());
    Pattern c_only;
    c_only.id = "c";
    c_only.symbols = {{"a", Role::Content}};
    auto diags = validate_store(Store({c_only}));
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].code == "no ID-symbols");
    Pattern a;
    a.id = "same";
    a.symbols = {{"a", Role::Id}};
    auto dup = validate_store(Store({a, a}));
    REQUIRE(dup.size() == 1);
    CHECK(dup[0].code == "duplicate id");
}

TEST_CASE("serialization round trip on random stores") {
    for (std::uint32_t seed = 0; seed < 200; ++seed) {
        std::mt19937 rng(seed);
        auto st = random_store(rng);
        auto text = serialize_store(st);
        auto back = parse_grammar_file(text);
        CAPTURE(seed);
        CHECK(serialize_store(back) == text);
        CHECK(back.alphabet() == st.alphabet());
        CHECK(back.cost_model().mode() == st.cost_model().mode());
        for (const auto& t : st.alphabet()) CHECK(symbol_cost(back, t) == symbol_cost(st, t));
    }
    for (const auto& c : spn::testing::fixture_cases()) {
        auto st = load_fixture(c.grammar);
        CHECK(serialize_store(parse_grammar_file(serialize_store(st))) == serialize_store(st));
    }
}

TEST_CASE("frequency costs are positive and pattern sizes add up") {
    for (std::uint32_t seed = 0; seed < 200; ++seed) {
        std::mt19937 rng(seed);
        auto st = random_store(rng).with_mode(CostMode::Frequency);
        if (st.alphabet().empty()) continue;
        CAPTURE(seed);
        for (const auto& t : st.alphabet()) {
            auto it = st.cost_model().counts().find(t);
            if (it != st.cost_model().counts().end() && it->second < st.cost_model().total_count())
                CHECK(symbol_cost(st, t) > 0);
        }
        std::vector<std::string> tokens(st.alphabet().begin(), st.alphabet().end());
        std::uniform_int_distribution<std::size_t> cut(0, tokens.size());
        auto k = cut(rng);
        std::span<const std::string> all(tokens);
        CHECK(pattern_size_bits(st, all) ==
              doctest::Approx(pattern_size_bits(st, all.first(k)) + pattern_size_bits(st, all.subspan(k))));
    }
}

TEST_CASE("grammar size under frequency costs matches the tally script") {
    auto st = load_fixture("sentence.sp").with_mode(CostMode::Frequency);
    std::vector<std::string> ids;
    for (const auto& p : st.patterns()) ids.push_back(p.id);
    CHECK(grammar_cost(st, ids) == doctest::Approx(kSentenceGrammarGrammarBits).epsilon(1e-12));
}

} // TEST_SUITE
