#include "spn/learn.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <unordered_map>

namespace spn {

namespace {

constexpr double kEps = 1e-9;

Symbol id_sym(std::string name) { return {std::move(name), Role::Id}; }
Symbol c_sym(std::string name) { return {std::move(name), Role::Content}; }

std::string unique_id(const Store& store, const std::set<std::string>& extra, std::string id) {
    if (!store.find(id) && !extra.contains(id)) return id;
    for (std::size_t n = 2;; ++n) {
        auto candidate = id + "-" + std::to_string(n);
        if (!store.find(candidate) && !extra.contains(candidate)) return candidate;
    }
}

/// `< X ... >` with X an ID-symbol: the class symbol X, else empty.
std::string class_of(const Pattern& p) {
    const auto& s = p.symbols;
    if (s.size() >= 3 && s.front().name == "<" && s.front().role == Role::Id && s[1].role == Role::Id &&
        s.back().name == ">" && s.back().role == Role::Id)
        return s[1].name;
    return {};
}

/// Discriminator of a class member `< X d ... >`, else empty.
std::string discriminator_of(const Pattern& p) {
    if (class_of(p).empty() || p.symbols.size() < 4) return {};
    const auto& d = p.symbols[2];
    if (d.role != Role::Id || d.name == ">") return {};
    return d.name;
}

struct Derivation {
    std::vector<Pattern> runs;
    std::vector<Pattern> old_members;
    std::vector<Pattern> new_members;
    std::optional<Pattern> abstract;
    bool reused_old = false;

    std::vector<Pattern> all() const {
        std::vector<Pattern> out = runs;
        out.insert(out.end(), old_members.begin(), old_members.end());
        out.insert(out.end(), new_members.begin(), new_members.end());
        if (abstract) out.push_back(*abstract);
        return out;
    }
};

Derivation derive_detailed(const Alignment& a, const Store& store, IdAllocator& alloc) {
    if (a.rows().size() != 2) throw Error("pattern derivation needs a two-row alignment");
    if (a.matched_column_count() == 0) throw Error("pattern derivation needs at least one matched column");
    const Pattern& old_row = a.row(1);

    struct Segment {
        bool matched = false;
        std::vector<std::string> run;
        std::vector<std::string> old_side;
        std::vector<std::string> new_side;
    };
    std::vector<Segment> segs;
    for (const auto& col : a.columns()) {
        if (col.size() >= 2) {
            if (segs.empty() || !segs.back().matched) segs.push_back({true, {}, {}, {}});
            segs.back().run.push_back(a.symbol(col.front()).name);
            continue;
        }
        const auto& e = col.front();
        const auto& sym = a.symbol(e);
        if (e.row == 1 && sym.role != Role::Content) continue;
        if (segs.empty() || segs.back().matched) segs.push_back({false, {}, {}, {}});
        (e.row == 0 ? segs.back().new_side : segs.back().old_side).push_back(sym.name);
    }

    Derivation out;
    bool any_slot = std::any_of(segs.begin(), segs.end(), [](const Segment& s) { return !s.matched; });
    if (!any_slot) return out;

    const std::string old_class = class_of(old_row);
    const bool old_flat = !old_class.empty() && discriminator_of(old_row).empty() &&
                          std::all_of(old_row.symbols.begin() + 2, old_row.symbols.end() - 1,
                                      [](const Symbol& s) { return s.role == Role::Content; });
    const bool old_one_run =
        std::count_if(segs.begin(), segs.end(), [](const Segment& s) { return s.matched; }) == 1 &&
        std::none_of(segs.begin(), segs.end(), [](const Segment& s) { return !s.old_side.empty(); });
    out.reused_old = old_flat && old_one_run;

    std::set<std::string> taken_ids;
    auto make_id = [&](const std::string& cls, const std::string& disc) {
        auto id = "c" + IdAllocator::number_of(cls) + (disc.empty() ? "" : "." + disc);
        id = unique_id(store, taken_ids, id);
        taken_ids.insert(id);
        return id;
    };
    const std::uint64_t yf = old_row.frequency;

    std::vector<std::string> refs(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (!segs[i].matched) continue;
        if (out.reused_old) {
            refs[i] = old_class;
            continue;
        }
        auto cls = alloc.next_class();
        refs[i] = cls;
        Pattern p;
        p.symbols = {id_sym("<"), id_sym(cls)};
        for (const auto& t : segs[i].run) p.symbols.push_back(c_sym(t));
        p.symbols.push_back(id_sym(">"));
        p.id = make_id(cls, "");
        p.frequency = yf + 1;
        p.origin = Origin::Learned;
        out.runs.push_back(std::move(p));
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (segs[i].matched) continue;
        auto cls = alloc.next_class();
        refs[i] = cls;
        for (int side = 0; side < 2; ++side) {
            const auto& toks = side == 0 ? segs[i].old_side : segs[i].new_side;
            auto disc = alloc.next_discriminator(cls);
            Pattern p;
            p.symbols = {id_sym("<"), id_sym(cls), id_sym(disc)};
            for (const auto& t : toks) p.symbols.push_back(c_sym(t));
            p.symbols.push_back(id_sym(">"));
            p.id = make_id(cls, disc);
            p.frequency = side == 0 ? std::max<std::uint64_t>(1, yf) : 1;
            p.origin = Origin::Learned;
            (side == 0 ? out.old_members : out.new_members).push_back(std::move(p));
        }
    }
    auto top = alloc.next_class();
    Pattern abs;
    abs.symbols = {id_sym("<"), id_sym(top)};
    for (const auto& r : refs) {
        abs.symbols.push_back(c_sym("<"));
        abs.symbols.push_back(c_sym(r));
        abs.symbols.push_back(c_sym(">"));
    }
    abs.symbols.push_back(id_sym(">"));
    abs.id = make_id(top, "");
    abs.frequency = yf + 1;
    abs.origin = Origin::Learned;
    out.abstract = std::move(abs);
    return out;
}

// Longest common subsequence preferring fewer matched runs.
struct LcsResult {
    std::size_t matches = 0;
    std::size_t runs = 0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

LcsResult lcs_fewest_runs(const std::vector<std::string>& x, const std::vector<std::string>& y) {
    const std::size_t n = x.size(), m = y.size();
    // value = matches * (n + m + 2) - runs; state m0: last pair not matched, m1: (i-1, j-1) matched.
    const long long w = static_cast<long long>(n + m + 2);
    constexpr long long kNeg = std::numeric_limits<long long>::min() / 4;
    std::vector<std::vector<std::array<long long, 2>>> dp(n + 1, std::vector<std::array<long long, 2>>(m + 1, {kNeg, kNeg}));
    // dp[i][j][s]: best value for suffixes x[i..], y[j..] given state s of the previous step.
    for (std::size_t i = n + 1; i-- > 0;) {
        for (std::size_t j = m + 1; j-- > 0;) {
            for (int s = 0; s < 2; ++s) {
                long long best = 0;
                if (i < n && j < m && x[i] == y[j]) best = std::max(best, dp[i + 1][j + 1][1] + w - (s ? 0 : 1));
                if (i < n) best = std::max(best, dp[i + 1][j][0]);
                if (j < m) best = std::max(best, dp[i][j + 1][0]);
                dp[i][j][s] = best;
            }
        }
    }
    LcsResult r;
    std::size_t i = 0, j = 0;
    int s = 0;
    while (i < n || j < m) {
        long long cur = dp[i][j][s];
        if (i < n && j < m && x[i] == y[j] && dp[i + 1][j + 1][1] + w - (s ? 0 : 1) == cur) {
            if (!s) ++r.runs;
            r.pairs.emplace_back(i, j);
            ++i;
            ++j;
            s = 1;
        } else if (i < n && dp[i + 1][j][0] == cur) {
            ++i;
            s = 0;
        } else if (j < m && dp[i][j + 1][0] == cur) {
            ++j;
            s = 0;
        } else {
            break;
        }
    }
    r.matches = r.pairs.size();
    return r;
}

std::map<std::string, std::vector<std::string>, std::less<>> id_owners(const Store& store) {
    std::map<std::string, std::vector<std::string>, std::less<>> owners;
    for (const auto& p : store.patterns())
        for (const auto& s : p.symbols)
            if (s.role == Role::Id && s.name != "<" && s.name != ">") owners[s.name].push_back(p.id);
    for (auto& [_, v] : owners) v.erase(std::unique(v.begin(), v.end()), v.end());
    return owners;
}

std::set<std::string> closure_with(const Store& store, const std::map<std::string, std::vector<std::string>, std::less<>>& owners,
                                   const std::vector<std::string>& roots) {
    std::set<std::string> seen;
    std::deque<std::string> queue(roots.begin(), roots.end());
    while (!queue.empty()) {
        auto id = queue.front();
        queue.pop_front();
        const auto* p = store.find(id);
        if (!p) continue;
        for (const auto& s : p->symbols) {
            if (s.role != Role::Content || s.name == "<" || s.name == ">") continue;
            auto it = owners.find(s.name);
            if (it == owners.end()) continue;
            for (const auto& q : it->second)
                if (seen.insert(q).second) queue.push_back(q);
        }
    }
    return seen;
}

bool is_referenced(const Store& store, const std::string& cls) {
    for (const auto& p : store.patterns())
        for (const auto& s : p.symbols)
            if (s.role == Role::Content && s.name == cls) return true;
    return false;
}

std::string subset_key(const std::vector<std::string>& subset) { return join(subset, "\x1f"); }

class SubsetEvaluator {
public:
    SubsetEvaluator(const Store& store, const Corpus& corpus, const SearchParams& params)
        : store_(store), corpus_(corpus), params_(params) {}

    GrammarCandidate evaluate(std::vector<std::string> subset) {
        std::sort(subset.begin(), subset.end());
        subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
        auto key = subset_key(subset);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        GrammarCandidate c;
        c.subset = subset;
        c.g = grammar_cost(store_, subset);
        c.e = corpus_encoding_cost(store_, subset, corpus_, params_);
        c.total = c.g + c.e;
        cache_.emplace(key, c);
        return c;
    }

private:
    const Store& store_;
    const Corpus& corpus_;
    const SearchParams& params_;
    std::unordered_map<std::string, GrammarCandidate> cache_;
};

} // namespace

Corpus parse_corpus(std::string_view text) {
    Corpus c;
    c.entries = parse_new_file(text);
    for (std::size_t i = 0; i < c.entries.size(); ++i) {
        c.entries[i].id = "entry" + std::to_string(i + 1);
        for (const auto& s : c.entries[i].symbols)
            if (s.name == "<" || s.name == ">") throw ParseError(0, "corpus entry " + std::to_string(i + 1) + " uses reserved token '" + s.name + "'");
    }
    return c;
}

IdAllocator::IdAllocator(const std::set<std::string, std::less<>>& data_tokens) : reserved_(data_tokens), data_(data_tokens) {
    reserved_.insert("<");
    reserved_.insert(">");
    data_.insert("<");
    data_.insert(">");
}

void IdAllocator::reserve_all(const Store& store) {
    for (const auto& t : store.alphabet()) {
        reserved_.insert(t);
        if (store.is_terminal(t)) data_.insert(t);
    }
}

std::string IdAllocator::next_class() {
    for (;;) {
        auto tok = "%" + std::to_string(next_class_++);
        if (reserved_.insert(tok).second) return tok;
    }
}

std::string IdAllocator::next_discriminator(const std::string& cls, const std::set<std::string, std::less<>>& taken) {
    auto& n = next_disc_[cls];
    for (;;) {
        auto tok = std::to_string(n++);
        if (!data_.contains(tok) && !taken.contains(tok)) return tok;
    }
}

std::string IdAllocator::number_of(const std::string& cls) { return cls.starts_with("%") ? cls.substr(1) : cls; }

Pattern augment_new(const Pattern& new_pattern, IdAllocator& alloc) {
    if (new_pattern.symbols.empty()) throw Error("cannot augment an empty pattern");
    auto cls = alloc.next_class();
    Pattern p;
    p.id = "c" + IdAllocator::number_of(cls);
    p.origin = Origin::Augmented;
    p.frequency = 1;
    p.symbols = {id_sym("<"), id_sym(cls)};
    for (const auto& s : new_pattern.symbols) p.symbols.push_back(c_sym(s.name));
    p.symbols.push_back(id_sym(">"));
    return p;
}

std::vector<Pattern> derive_patterns_from_alignment(const Alignment& a, const Store& store, IdAllocator& alloc) {
    return derive_detailed(a, store, alloc).all();
}

Store update_frequencies(const Store& store, const Alignment& a) {
    if (a.is_fallback()) return store;
    std::map<std::string, std::uint64_t, std::less<>> inc;
    for (std::size_t r = 1; r < a.rows().size(); ++r) ++inc[a.row(r).id];
    auto patterns = store.patterns();
    for (auto& p : patterns)
        if (auto it = inc.find(p.id); it != inc.end()) p.frequency += it->second;
    return store.with_patterns(std::move(patterns));
}

double grammar_cost(const Store& store, const std::vector<std::string>& subset) {
    double total = 0;
    for (const auto& id : subset) {
        const auto* p = store.find(id);
        if (!p) throw Error("unknown pattern id '" + id + "'");
        total += pattern_size_bits(store, std::span<const Symbol>(p->symbols));
    }
    return total;
}

double corpus_encoding_cost(const Store& store, const std::vector<std::string>& subset, const Corpus& corpus,
                            const SearchParams& params) {
    const Store sub = store.restricted_to(subset);
    double total = 0;
    for (const auto& entry : corpus.entries) {
        if (subset.empty()) {
            total += pattern_size_bits(store_covering(store, entry), std::span<const Symbol>(entry.symbols));
            continue;
        }
        total += build_alignments(sub, entry, params).front().score().n_e;
    }
    return total;
}

GrammarCandidate evaluate_subset(const Store& store, const std::vector<std::string>& subset, const Corpus& corpus,
                                 const SearchParams& params) {
    SubsetEvaluator ev(store, corpus, params);
    return ev.evaluate(subset);
}

std::set<std::string> reference_closure(const Store& store, const std::string& pattern_id) {
    return closure_with(store, id_owners(store), {pattern_id});
}

GrammarCandidate select_grammar(const Store& store, const Corpus& corpus, const SearchParams& params) {
    SubsetEvaluator ev(store, corpus, params);
    const auto owners = id_owners(store);
    GrammarCandidate current = ev.evaluate({});
    std::set<std::string> chosen;
    for (;;) {
        std::optional<GrammarCandidate> best;
        for (const auto& p : store.patterns()) {
            if (chosen.contains(p.id)) continue;
            auto unit = closure_with(store, owners, {p.id});
            unit.insert(p.id);
            unit.insert(chosen.begin(), chosen.end());
            auto cand = ev.evaluate({unit.begin(), unit.end()});
            if (!best || cand.total < best->total - kEps) best = cand;
        }
        if (!best || best->total >= current.total - kEps) break;
        current = *best;
        chosen.insert(current.subset.begin(), current.subset.end());
    }
    return current;
}

std::string_view action_name(LearnAction action) {
    switch (action) {
    case LearnAction::Augment: return "AUGMENT";
    case LearnAction::Derive: return "DERIVE";
    case LearnAction::Match: return "MATCH";
    }
    return "?";
}

namespace {

class Learner {
public:
    Learner(const Corpus& corpus, const SearchParams& params, const LearnOptions& options)
        : corpus_(corpus), params_(params), options_(options) {
        std::set<std::string, std::less<>> tokens;
        for (const auto& e : corpus.entries)
            for (const auto& s : e.symbols) tokens.insert(s.name);
        StoreOptions opts;
        opts.mode = options.mode;
        opts.extra_alphabet = tokens;
        store_ = Store({}, opts);
        alloc_ = IdAllocator(tokens);
    }

    LearnResult run() {
        LearnResult result;
        std::optional<std::vector<std::string>> previous;
        for (std::size_t pass = 1; pass <= options_.passes; ++pass) {
            tally_.clear();
            bool created = false;
            for (std::size_t i = 0; i < corpus_.entries.size(); ++i) {
                auto rec = process(pass, i);
                created = created || !rec.created.empty();
                result.entries.push_back(std::move(rec));
            }
            auto patterns = store_.patterns();
            for (auto& p : patterns) {
                auto it = tally_.find(p.id);
                p.frequency = std::max<std::uint64_t>(1, it == tally_.end() ? 0 : it->second);
            }
            store_ = store_.with_patterns(std::move(patterns));

            LearnPassRecord pr;
            pr.pass = pass;
            pr.selection = select_grammar(store_, corpus_, params_);
            pr.raw_bits = corpus_encoding_cost(store_, {}, corpus_, params_);
            if (pr.selection.subset.empty()) {
                pr.retained_all = true;
            } else {
                auto owners = id_owners(store_);
                std::vector<std::string> roots = pr.selection.subset;
                for (const auto& p : store_.patterns())
                    if (p.origin == Origin::User) roots.push_back(p.id);
                auto keep = closure_with(store_, owners, roots);
                keep.insert(roots.begin(), roots.end());
                std::vector<Pattern> kept;
                for (const auto& p : store_.patterns()) {
                    if (keep.contains(p.id)) kept.push_back(p);
                    else pr.purged.push_back(p.id);
                }
                store_ = store_.with_patterns(std::move(kept));
            }
            result.selection = pr.selection;
            result.raw_bits = pr.raw_bits;
            const bool stable = previous && *previous == pr.selection.subset;
            previous = pr.selection.subset;
            result.passes.push_back(std::move(pr));
            if (!created && stable) break;
        }
        result.store = store_;
        return result;
    }

private:
    LearnEntryRecord process(std::size_t pass, std::size_t index) {
        const Pattern& entry = corpus_.entries[index];
        LearnEntryRecord rec;
        rec.pass = pass;
        rec.index = index;
        auto res = search_alignments(store_, entry, params_);
        rec.cd = res.ranked.front().score().cd;
        if (res.best_complete) {
            rec.action = LearnAction::Match;
            rec.cd = res.best_complete->score().cd;
            count_rows(*res.best_complete);
            return rec;
        }
        if (try_class_extension(entry, res, rec) || try_derivation(entry, rec)) {
            rec.action = LearnAction::Derive;
            return rec;
        }
        rec.action = LearnAction::Augment;
        alloc_.reserve_all(store_);
        auto p = augment_new(entry, alloc_);
        p.id = unique_id(store_, {}, p.id);
        rec.created.push_back(p.id);
        tally_[p.id] += 1;
        add_patterns({p});
        return rec;
    }

    void count_rows(const Alignment& a) {
        for (std::size_t r = 1; r < a.rows().size(); ++r) tally_[a.row(r).id] += 1;
    }

    void add_patterns(const std::vector<Pattern>& extra, const std::string& removed = {}) {
        std::vector<Pattern> patterns;
        for (const auto& p : store_.patterns())
            if (p.id != removed) patterns.push_back(p);
        patterns.insert(patterns.end(), extra.begin(), extra.end());
        store_ = store_.with_patterns(std::move(patterns));
    }

    // An entry that fits an existing abstract pattern except for one slot
    // gets a new member of that slot's class.
    bool try_class_extension(const Pattern& entry, const SearchResult& res, LearnEntryRecord& rec) {
        std::map<std::string, std::set<std::string, std::less<>>, std::less<>> members;
        for (const auto& p : store_.patterns()) {
            auto d = discriminator_of(p);
            if (!d.empty()) members[class_of(p)].insert(d);
        }
        if (members.empty()) return false;
        // Candidate (class, run) pairs; the shortest new member is tried first.
        std::vector<std::pair<std::string, std::vector<std::string>>> candidates;
        std::set<std::string> seen;
        for (std::size_t k = 0; k < res.any_ranked.size(); ++k) {
            const auto& a = res.any_ranked[k];
            std::vector<std::size_t> col_index;
            std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> where;
            for (std::size_t c = 0; c < a.columns().size(); ++c)
                for (const auto& e : a.columns()[c]) where[{e.row, e.pos}] = c;
            auto single = [&](std::uint32_t r, std::uint32_t p) { return a.columns()[where[{r, p}]].size() == 1; };

            std::vector<std::string> refs;
            for (std::uint32_t r = 1; r < a.rows().size(); ++r) {
                const auto& syms = a.row(r).symbols;
                for (std::uint32_t p = 0; p + 2 < syms.size(); ++p) {
                    if (syms[p].name == "<" && syms[p].role == Role::Content && syms[p + 1].role == Role::Content &&
                        syms[p + 2].name == ">" && syms[p + 2].role == Role::Content && members.contains(syms[p + 1].name) &&
                        single(r, p + 1))
                        refs.push_back(syms[p + 1].name);
                }
            }
            if (refs.size() != 1) continue;
            std::vector<std::vector<std::string>> runs;
            bool in_run = false;
            for (std::uint32_t i = 0; i < entry.symbols.size(); ++i) {
                if (single(0, i)) {
                    if (!in_run) runs.emplace_back();
                    runs.back().push_back(entry.symbols[i].name);
                    in_run = true;
                } else {
                    in_run = false;
                }
            }
            if (runs.size() > 1) continue;
            auto run = runs.empty() ? std::vector<std::string>{} : runs.front();
            if (seen.insert(refs.front() + "|" + join(run)).second) candidates.emplace_back(refs.front(), run);
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const auto& a, const auto& b) { return a.second.size() < b.second.size(); });
        for (const auto& [cls, run] : candidates) {
            IdAllocator trial_alloc = alloc_;
            auto disc = trial_alloc.next_discriminator(cls, members[cls]);
            Pattern p;
            p.symbols = {id_sym("<"), id_sym(cls), id_sym(disc)};
            for (const auto& t : run) p.symbols.push_back(c_sym(t));
            p.symbols.push_back(id_sym(">"));
            p.id = unique_id(store_, {}, "c" + IdAllocator::number_of(cls) + "." + disc);
            p.origin = Origin::Learned;
            p.frequency = 1;

            Store saved = store_;
            add_patterns({p});
            auto trial = search_alignments(store_, entry, params_);
            if (!trial.best_complete) {
                store_ = std::move(saved);
                continue;
            }
            alloc_ = std::move(trial_alloc);
            rec.created.push_back(p.id);
            rec.cd = trial.best_complete->score().cd;
            count_rows(*trial.best_complete);
            return true;
        }
        return false;
    }

    // Factor the entry against the best-matching flat, unreferenced pattern.
    bool try_derivation(const Pattern& entry, LearnEntryRecord& rec) {
        const auto x = entry.names();
        const Pattern* best = nullptr;
        LcsResult best_lcs;
        std::vector<std::size_t> best_positions;
        for (const auto& p : store_.patterns()) {
            auto cls = class_of(p);
            if (cls.empty() || !discriminator_of(p).empty() || is_referenced(store_, cls)) continue;
            std::vector<std::string> content;
            std::vector<std::size_t> positions;
            bool flat = true;
            for (std::size_t i = 2; i + 1 < p.symbols.size(); ++i) {
                if (p.symbols[i].role != Role::Content || p.symbols[i].name == "<" || p.symbols[i].name == ">") {
                    flat = false;
                    break;
                }
                content.push_back(p.symbols[i].name);
                positions.push_back(i);
            }
            if (!flat || content.empty()) continue;
            auto lcs = lcs_fewest_runs(x, content);
            if (lcs.matches == 0 || 2 * lcs.matches < std::min(x.size(), content.size())) continue;
            if (!best || lcs.matches > best_lcs.matches ||
                (lcs.matches == best_lcs.matches && lcs.runs < best_lcs.runs)) {
                best = &p;
                best_lcs = std::move(lcs);
                best_positions = std::move(positions);
            }
        }
        if (!best) return false;
        const Pattern y = *best;

        std::vector<Column> cols;
        std::vector<bool> new_used(x.size(), false), old_used(y.symbols.size(), false);
        for (auto [i, j] : best_lcs.pairs) {
            auto pos = best_positions[j];
            cols.push_back({Entry{0, static_cast<std::uint32_t>(i)}, Entry{1, static_cast<std::uint32_t>(pos)}});
            new_used[i] = true;
            old_used[pos] = true;
        }
        for (std::uint32_t i = 0; i < x.size(); ++i)
            if (!new_used[i]) cols.push_back({Entry{0, i}});
        for (std::uint32_t i = 0; i < y.symbols.size(); ++i)
            if (!old_used[i]) cols.push_back({Entry{1, i}});
        auto a = Alignment::assemble({std::make_shared<const Pattern>(entry), std::make_shared<const Pattern>(y)},
                                     std::move(cols), store_);
        if (!a) return false;

        alloc_.reserve_all(store_);
        auto d = derive_detailed(*a, store_, alloc_);
        auto created = d.all();
        if (created.empty()) return false;

        const std::uint64_t ty = tally_.count(y.id) ? tally_[y.id] : 0;
        for (const auto& p : d.runs) tally_[p.id] = ty + 1;
        for (const auto& p : d.old_members) tally_[p.id] = ty;
        for (const auto& p : d.new_members) tally_[p.id] = 1;
        if (d.abstract) tally_[d.abstract->id] = ty + 1;
        if (d.reused_old) tally_[y.id] = ty + 1;
        else tally_.erase(y.id);

        for (const auto& p : created) rec.created.push_back(p.id);
        rec.cd = a->score().cd;
        add_patterns(created, d.reused_old ? std::string{} : y.id);
        return true;
    }

    const Corpus& corpus_;
    const SearchParams& params_;
    const LearnOptions& options_;
    Store store_;
    IdAllocator alloc_;
    std::map<std::string, std::uint64_t, std::less<>> tally_;
};

} // namespace

LearnResult learn(const Corpus& corpus, const SearchParams& params, const LearnOptions& options) {
    if (corpus.entries.empty()) throw Error("learning needs a non-empty corpus");
    if (options.passes == 0) throw Error("pass limit must be positive");
    for (const auto& e : corpus.entries) {
        if (e.symbols.empty()) throw Error("corpus entries must be non-empty");
        for (const auto& s : e.symbols)
            if (s.name == "<" || s.name == ">") throw Error("corpus uses reserved token '" + s.name + "'");
    }
    return Learner(corpus, params, options).run();
}

Corpus random_corpus(std::uint64_t seed, const RandomCorpusLimits& limits) {
    if (limits.alphabet == 0 || limits.alphabet > 26 || limits.max_length == 0 || limits.max_sentences == 0)
        throw Error("random corpus limits out of range");
    std::mt19937_64 rng(seed);
    auto below = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    const std::size_t letters = limits.alphabet < 2 ? 1 : 2 + below(limits.alphabet - 1);
    std::vector<std::vector<std::string>> words(2 + below(4));
    for (auto& w : words) {
        w.resize(1 + below(4));
        for (auto& t : w) t = std::string(1, static_cast<char>('a' + below(letters)));
    }
    Corpus corpus;
    const std::size_t count = 1 + below(limits.max_sentences);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<std::string> tokens;
        const std::size_t n_words = 1 + below(3);
        for (std::size_t k = 0; k < n_words; ++k) {
            const auto& w = words[below(words.size())];
            tokens.insert(tokens.end(), w.begin(), w.end());
        }
        if (tokens.size() > limits.max_length) tokens.resize(limits.max_length);
        auto p = make_new_pattern(tokens);
        p.id = "entry" + std::to_string(i + 1);
        corpus.entries.push_back(std::move(p));
    }
    return corpus;
}

} // namespace spn
