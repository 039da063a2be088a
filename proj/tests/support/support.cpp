#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#ifndef SPN_FIXTURE_DIR
#error "SPN_FIXTURE_DIR must point at the fixtures directory"
#endif

namespace spn::testing {

std::string fixture_path(const std::string& name) { return std::string(SPN_FIXTURE_DIR) + "/" + name; }

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Store load_fixture(const std::string& name) { return parse_grammar_file(read_text(fixture_path(name))); }

const std::vector<FixtureCase>& fixture_cases() {
    static const std::vector<FixtureCase> cases = {
        {"sentence.sp", "t h e c a t s l e e p s",
         {"d-the", "n-sing", "np", "nstem-cat", "num-sng", "s", "v-sing", "vstem-sleep"}},
        {"agreement.sp", "t h e c a t s l e e p s",
         {"d-the", "n-sing", "np", "nstem-cat", "num-sng", "s", "v-sing", "vstem-sleep"}},
        {"animals.sp", "eats breathes backbone suckles furry purrs tabby white-bib",
         {"animal", "cat", "mammal", "tibs", "vertebrate"}},
        {"embedding.sp", "A B C C' B' A'", {"x1", "x2", "x3"}},
        {"switch.sp", "s w i t c h t h e l i g h t o n", {"d-the", "n-light", "np", "vp"}},
        {"repeat.sp", "t h e b o y k i c k e d t h e b a l l", {"d-the", "n-ball", "n-boy", "np", "s"}},
        {"recursion.sp", "t h e v e r y v e r y f a s t c a r", {"a-fast", "d-the", "n-car", "np", "x-very"}},
    };
    return cases;
}

std::vector<std::string> legality_violations(const Alignment& a) {
    std::vector<std::string> out;
    const auto& rows = a.rows();
    const auto& cols = a.columns();
    if (rows.empty()) return {"no rows"};
    for (const auto& s : rows[0]->symbols)
        if (s.role != Role::Data) out.push_back("row 0 is not a New pattern");
    for (std::size_t r = 1; r < rows.size(); ++r)
        for (const auto& s : rows[r]->symbols)
            if (s.role == Role::Data) out.push_back("row " + std::to_string(r) + " holds New symbols");

    std::vector<std::vector<int>> seen(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) seen[r].assign(rows[r]->symbols.size(), 0);
    std::vector<long> last(rows.size(), -1);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& col = cols[c];
        const std::string where = "column " + std::to_string(c);
        if (col.empty()) {
            out.push_back(where + " is empty");
            continue;
        }
        std::set<std::uint32_t> rows_here;
        int ids = 0;
        for (const auto& e : col) {
            if (e.row >= rows.size() || e.pos >= rows[e.row]->symbols.size()) {
                out.push_back(where + " points outside the rows");
                continue;
            }
            if (!rows_here.insert(e.row).second) out.push_back(where + " has two entries in one row");
            const auto& s = rows[e.row]->symbols[e.pos];
            if (s.name != rows[col.front().row]->symbols[col.front().pos].name)
                out.push_back(where + " mixes names");
            if (s.role == Role::Id) ++ids;
            if (static_cast<long>(e.pos) <= last[e.row]) out.push_back(where + " crosses an earlier column");
            last[e.row] = e.pos;
            ++seen[e.row][e.pos];
        }
        if (ids > 1) out.push_back(where + " holds more than one ID-symbol");
    }
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t p = 0; p < seen[r].size(); ++p)
            if (seen[r][p] != 1)
                out.push_back("symbol " + std::to_string(p) + " of row " + std::to_string(r) + " appears " +
                              std::to_string(seen[r][p]) + " times");
    return out;
}

std::vector<std::string> scan_encoding(const Alignment& a) {
    std::vector<std::string> out;
    for (const auto& col : a.columns()) {
        if (col.size() != 1) continue;
        const auto& s = a.rows()[col.front().row]->symbols[col.front().pos];
        if (s.role == Role::Id) out.push_back(s.name);
    }
    return out;
}

AlignmentScore rescore(const Store& store, const Alignment& a) {
    AlignmentScore s;
    const auto& row0 = a.rows()[0]->symbols;
    for (const auto& sym : row0) s.n_o += symbol_cost(store, sym.name);
    if (a.rows().size() == 1) {
        s.n_e = s.n_o;
        return s;
    }
    for (const auto& name : scan_encoding(a)) s.n_e += symbol_cost(store, name);
    for (const auto& col : a.columns())
        if (col.size() == 1 && col.front().row == 0) s.n_e += symbol_cost(store, row0[col.front().pos].name);
    s.cd = s.n_o - s.n_e;
    return s;
}

RandomInstance random_instance(std::uint32_t seed, const RandomStoreShape& shape) {
    std::mt19937 rng(seed);
    auto pick = [&](int k) { return std::uniform_int_distribution<int>(0, k - 1)(rng); };
    const std::vector<std::string> data = {"a", "b", "c", "d", "e"};
    const std::vector<std::string> ids = {"<", ">", "P", "Q", "0", "1"};
    std::vector<Pattern> patterns;
    const int count = 1 + pick(shape.max_patterns);
    for (int k = 0; k < count; ++k) {
        Pattern p;
        p.id = "p" + std::to_string(k);
        const int len = shape.min_length + pick(shape.max_length - shape.min_length + 1);
        bool has_id = false;
        for (int i = 0; i < len; ++i) {
            Symbol s;
            if (pick(3) == 0) {
                s.name = ids[pick(static_cast<int>(ids.size()))];
                s.role = Role::Id;
                has_id = true;
            } else {
                s.name = pick(4) == 0 ? ids[pick(static_cast<int>(ids.size()))] : data[pick(static_cast<int>(data.size()))];
                s.role = Role::Content;
            }
            p.symbols.push_back(s);
        }
        if (!has_id) p.symbols[0] = {ids[pick(static_cast<int>(ids.size()))], Role::Id};
        patterns.push_back(std::move(p));
    }
    std::vector<std::string> tokens;
    const int n = shape.min_new + pick(shape.max_new - shape.min_new + 1);
    for (int i = 0; i < n; ++i) tokens.push_back(data[pick(static_cast<int>(data.size()))]);
    return {Store(std::move(patterns)), make_new_pattern(tokens)};
}

std::vector<std::set<std::pair<std::uint32_t, std::uint32_t>>> brute_matchings(const Pattern& new_pattern,
                                                                               const Pattern& pattern) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (std::uint32_t i = 0; i < new_pattern.symbols.size(); ++i)
        for (std::uint32_t j = 0; j < pattern.symbols.size(); ++j)
            if (new_pattern.symbols[i].name == pattern.symbols[j].name) pairs.emplace_back(i, j);
    if (pairs.size() > 20) throw std::runtime_error("too many candidate pairs");
    std::vector<std::set<std::pair<std::uint32_t, std::uint32_t>>> out;
    for (std::uint32_t mask = 1; mask < (1u << pairs.size()); ++mask) {
        std::set<std::pair<std::uint32_t, std::uint32_t>> chosen;
        for (std::size_t k = 0; k < pairs.size(); ++k)
            if (mask & (1u << k)) chosen.insert(pairs[k]);
        bool ok = true;
        const std::pair<std::uint32_t, std::uint32_t>* prev = nullptr;
        for (const auto& pr : chosen) {
            if (prev && (pr.first <= prev->first || pr.second <= prev->second)) ok = false;
            prev = &pr;
        }
        if (ok) out.push_back(std::move(chosen));
    }
    return out;
}

Alignment two_row(const Pattern& new_pattern, const Pattern& pattern,
                  const std::set<std::pair<std::uint32_t, std::uint32_t>>& pairs, const Store& store) {
    std::vector<Column> cols;
    std::vector<bool> used_new(new_pattern.symbols.size()), used_old(pattern.symbols.size());
    for (const auto& [i, j] : pairs) {
        cols.push_back({Entry{0, i}, Entry{1, j}});
        used_new[i] = true;
        used_old[j] = true;
    }
    for (std::uint32_t i = 0; i < used_new.size(); ++i)
        if (!used_new[i]) cols.push_back({Entry{0, i}});
    for (std::uint32_t j = 0; j < used_old.size(); ++j)
        if (!used_old[j]) cols.push_back({Entry{1, j}});
    auto a = Alignment::assemble({std::make_shared<const Pattern>(new_pattern), std::make_shared<const Pattern>(pattern)},
                                 std::move(cols), store);
    if (!a) throw std::runtime_error("pairs do not form an alignment");
    return *a;
}

GrammarCandidate exhaustive_selection(const Store& store, const Corpus& corpus, const SearchParams& params) {
    const auto& pats = store.patterns();
    if (pats.size() > 12) throw std::runtime_error("candidate pool too large");
    std::optional<GrammarCandidate> best;
    for (std::uint32_t mask = 0; mask < (1u << pats.size()); ++mask) {
        std::vector<std::string> subset;
        for (std::size_t k = 0; k < pats.size(); ++k)
            if (mask & (1u << k)) subset.push_back(pats[k].id);
        GrammarCandidate c;
        c.subset = subset;
        c.g = 0;
        for (const auto& id : subset)
            for (const auto& s : store.find(id)->symbols) c.g += symbol_cost(store, s.name);
        c.e = corpus_encoding_cost(store, subset, corpus, params);
        c.total = c.g + c.e;
        if (!best || c.total < best->total - 1e-9) best = c;
    }
    return *best;
}

std::vector<std::string> membership_violations(const Network& net) {
    std::vector<std::string> out;
    std::map<std::uint32_t, int> in_assembly, in_pool;
    for (const auto& [aid, a] : net.assemblies())
        for (auto n : a.neurons) ++in_assembly[n];
    for (auto n : net.free_pool()) ++in_pool[n];
    for (const auto& n : net.neurons()) {
        const int a = in_assembly[n.id];
        const int p = in_pool[n.id];
        if (n.kind == NeuronKind::Receptor) {
            if (a || p) out.push_back("receptor " + std::to_string(n.id) + " is owned");
            continue;
        }
        if (a + p != 1)
            out.push_back("neuron " + std::to_string(n.id) + " has " + std::to_string(a) + " assemblies and " +
                          std::to_string(p) + " pool slots");
    }
    return out;
}

Pattern old_pattern(const std::string& id, const std::string& text) {
    Pattern p;
    p.id = id;
    for (const auto& tok : split_tokens(text)) {
        auto slash = tok.rfind('/');
        if (slash == std::string::npos) throw std::runtime_error("role missing in " + tok);
        p.symbols.push_back({tok.substr(0, slash), tok.substr(slash + 1) == "I" ? Role::Id : Role::Content});
    }
    return p;
}

} // namespace spn::testing

namespace spn::testing {

const std::vector<std::string>& sentence_topology() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> v = {
            "num-sng:0 s:1",          "num-sng:2 s:2",          "np:0 s:3",             "np:1 s:4",
            "d-the:0 np:2",           "d-the:1 np:3",           "new:0 d-the:3",        "new:1 d-the:4",
            "new:2 d-the:5",          "d-the:6 np:4",           "n-sing:0 np:5",        "n-sing:1 np:6",
            "n-sing:2 num-sng:3",     "n-sing:3 nstem-cat:0",   "n-sing:4 nstem-cat:1", "new:3 nstem-cat:3",
            "new:4 nstem-cat:4",      "new:5 nstem-cat:5",      "n-sing:5 nstem-cat:6", "n-sing:6 np:7",
            "np:8 s:5",               "s:6 v-sing:0",           "s:7 v-sing:1",         "num-sng:4 v-sing:2",
            "v-sing:3 vstem-sleep:0", "v-sing:4 vstem-sleep:1", "new:6 vstem-sleep:3",  "new:7 vstem-sleep:4",
            "new:8 vstem-sleep:5",    "new:9 vstem-sleep:6",    "new:10 vstem-sleep:7", "v-sing:5 vstem-sleep:8",
            "new:11 v-sing:6",        "s:8 v-sing:7"};
        std::sort(v.begin(), v.end());
        return v;
    }();
    return cols;
}

std::vector<std::string> matched_columns(const Alignment& a) {
    std::vector<std::string> out;
    for (const auto& col : a.columns()) {
        if (col.size() < 2) continue;
        std::string s;
        for (const auto& e : col) {
            if (!s.empty()) s += ' ';
            s += (e.row == 0 ? std::string("new") : a.row(e.row).id) + ":" + std::to_string(e.pos);
        }
        out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Corpus boygirl_corpus() { return parse_corpus(read_text(fixture_path("boygirl.txt"))); }

Store boygirl_pool() {
    auto c = boygirl_corpus();
    LearnOptions one;
    one.passes = 1;
    auto r = learn(c, {}, one);
    auto pats = r.store.patterns();
    std::set<std::string, std::less<>> data;
    for (const auto& e : c.entries)
        for (const auto& s : e.symbols) data.insert(s.name);
    IdAllocator alloc(data);
    alloc.reserve_all(r.store);
    for (const auto& e : c.entries) {
        auto p = augment_new(e, alloc);
        p.id = "whole-" + std::to_string(pats.size());
        pats.push_back(p);
    }
    return Store(pats, r.store.options());
}

std::string canonical_grammar(const Store& store, const std::set<std::string, std::less<>>& data_tokens) {
    auto generated = [&](const std::string& t) { return t != "<" && t != ">" && !data_tokens.contains(t); };
    // Order patterns by their shape with generated tokens masked.
    std::vector<std::pair<std::string, const Pattern*>> order;
    for (const auto& p : store.patterns()) {
        std::string masked;
        for (const auto& s : p.symbols) masked += (generated(s.name) ? std::string("?") : s.name) + "/" + std::string(role_name(s.role)) + " ";
        order.emplace_back(masked, &p);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::map<std::string, std::string> rename;
    std::string out;
    for (const auto& [masked, p] : order) {
        for (const auto& s : p->symbols) {
            std::string name = s.name;
            if (generated(name)) {
                auto it = rename.find(name);
                if (it == rename.end()) it = rename.emplace(name, "g" + std::to_string(rename.size())).first;
                name = it->second;
            }
            out += name + "/" + std::string(role_name(s.role)) + " ";
        }
        out += "\n";
    }
    return out;
}

Network random_assembly_ops(Network net, std::uint32_t seed, int ops) {
    const std::vector<std::string> alphabet(net.data_tokens().begin(), net.data_tokens().end());
    std::mt19937 rng(seed);
    auto pick = [&](std::size_t k) { return static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)); };
    std::size_t serial = 0;
    for (int op = 0; op < ops; ++op) {
        const auto& asms = net.assemblies();
        std::map<std::string, int> id_names;
        std::set<std::string> wanted;
        std::vector<std::string> classes;
        for (const auto& [id, a] : asms)
            for (const auto& s : a.pattern.symbols) {
                if (s.role == Role::Id) {
                    if (id_names[s.name]++ == 0 && s.name.starts_with("W")) classes.push_back(s.name);
                } else if (!net.data_tokens().contains(s.name)) {
                    wanted.insert(s.name);
                }
            }
        if (asms.empty() || pick(5) < 3) {
            Pattern p;
            p.id = "r" + std::to_string(serial++);
            if (!classes.empty() && pick(3) == 0) {
                p.symbols = {{"<", Role::Id}, {"P" + std::to_string(serial), Role::Id}};
                for (std::size_t k = 1 + pick(3); k > 0; --k) {
                    p.symbols.push_back({"<", Role::Content});
                    p.symbols.push_back({classes[pick(classes.size())], Role::Content});
                    p.symbols.push_back({">", Role::Content});
                }
            } else {
                p.symbols = {{"<", Role::Id}, {"W" + std::to_string(pick(6)), Role::Id}, {"k" + std::to_string(serial), Role::Id}};
                for (std::size_t k = 1 + pick(5); k > 0; --k) p.symbols.push_back({alphabet[pick(alphabet.size())], Role::Content});
            }
            p.symbols.push_back({">", Role::Id});
            net = create_assembly(std::move(net), p);
            continue;
        }
        std::vector<std::uint32_t> removable;
        for (const auto& [id, a] : asms) {
            bool safe = true;
            std::map<std::string, int> own;
            for (const auto& s : a.pattern.symbols)
                if (s.role == Role::Id) ++own[s.name];
            for (const auto& [name, n] : own) {
                if (id_names[name] > n) continue;
                // Last source of `name`: only safe when no other assembly needs it.
                for (const auto& [oid, other] : asms) {
                    if (oid == id) continue;
                    for (const auto& s : other.pattern.symbols)
                        if (s.role == Role::Content && s.name == name) safe = false;
                }
            }
            if (safe) removable.push_back(id);
        }
        if (removable.empty()) continue;
        net = purge_assembly(std::move(net), removable[pick(removable.size())]);
    }
    return net;
}

} // namespace spn::testing
