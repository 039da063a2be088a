#include "spn/align.hpp"

#include "bitset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

namespace spn {

namespace {

using detail::Bitset;

constexpr double kEps = 1e-9;
constexpr std::size_t kNodeBudget = 200000;
// Generations without a better alignment before the search gives up.
constexpr std::size_t kPatience = 4;
// Beam entries allowed per multiset of Old patterns, so that variants of one
// row combination do not crowd out the others.
constexpr std::size_t kPerRowSet = 2;

struct Reach {
    std::vector<Bitset> anc;  // columns that precede c, plus c itself
    std::vector<Bitset> desc; // columns that follow c, plus c itself
};

Reach reachability(const Alignment& a) {
    const auto& cols = a.columns();
    const std::size_t n = cols.size();
    std::vector<std::vector<std::size_t>> col_of(a.rows().size());
    for (std::size_t r = 0; r < a.rows().size(); ++r) col_of[r].resize(a.row(r).symbols.size());
    for (std::size_t c = 0; c < n; ++c)
        for (const auto& e : cols[c]) col_of[e.row][e.pos] = c;
    std::vector<std::vector<std::size_t>> succ(n), pred(n);
    for (const auto& v : col_of) {
        for (std::size_t p = 0; p + 1 < v.size(); ++p) {
            succ[v[p]].push_back(v[p + 1]);
            pred[v[p + 1]].push_back(v[p]);
        }
    }
    Reach g;
    g.anc.assign(n, Bitset(n));
    g.desc.assign(n, Bitset(n));
    // Columns are stored in topological order.
    for (std::size_t c = 0; c < n; ++c) {
        g.anc[c].set(c);
        for (auto p : pred[c]) g.anc[c] |= g.anc[p];
    }
    for (std::size_t c = n; c-- > 0;) {
        g.desc[c].set(c);
        for (auto s : succ[c]) g.desc[c] |= g.desc[s];
    }
    return g;
}

struct Matching {
    std::vector<int> assign; // column per pattern position, -1 = unmatched
    double gain = 0;
    std::size_t matched = 0;
    // Distance between the first and last matched column.
    int spread = 0;
};

bool better_matching(const Matching& a, const Matching& b) {
    if (std::abs(a.gain - b.gain) > kEps) return a.gain > b.gain;
    if (a.matched != b.matched) return a.matched > b.matched;
    if (a.spread != b.spread) return a.spread < b.spread;
    return a.assign < b.assign;
}

enum class MatchMode { All, Maximal };

class Matcher {
public:
    // With `reduced`, a symbol only joins a single-entry column and at least
    // one of the two is a New symbol or an ID-symbol. Any alignment can be
    // split into that form without changing its encoding.
    Matcher(const Alignment& base, const Pattern& pattern, const Store& store, const Reach& reach,
            bool reduced = false)
        : base_(base), pattern_(pattern), reach_(reach) {
        const auto& cols = base.columns();
        const std::size_t n = pattern.symbols.size();
        cands_.resize(n);
        best_gain_.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = pattern.symbols[i];
            double own = s.role == Role::Id ? symbol_cost(store, s.name) : 0.0;
            for (std::size_t c = 0; c < cols.size(); ++c) {
                const auto& col = cols[c];
                const auto& head = base.symbol(col.front());
                if (!match_symbols(head, s)) continue;
                bool col_has_id = std::any_of(col.begin(), col.end(),
                                              [&](const Entry& e) { return base.symbol(e).role == Role::Id; });
                if (col_has_id && s.role == Role::Id) continue;
                if (reduced && (col.size() != 1 ||
                                (col.front().row != 0 && head.role != Role::Id && s.role != Role::Id)))
                    continue;
                double g = own;
                if (col.size() == 1 && (head.role == Role::Id || col.front().row == 0)) g += symbol_cost(store, s.name);
                cands_[i].push_back({static_cast<int>(c), g});
            }
            std::stable_sort(cands_[i].begin(), cands_[i].end(),
                             [](const Cand& a, const Cand& b) { return a.gain > b.gain + kEps; });
        }
        for (std::size_t i = n; i-- > 0;) {
            double m = 0;
            for (const auto& c : cands_[i]) m = std::max(m, c.gain);
            best_gain_[i] = best_gain_[i + 1] + m;
        }
        avail_.assign(n + 1, 0);
        for (std::size_t i = n; i-- > 0;) avail_[i] = avail_[i + 1] + (cands_[i].empty() ? 0 : 1);
    }

    std::vector<Matching> run(MatchMode mode, std::size_t k) {
        mode_ = mode;
        k_ = k;
        results_.clear();
        nodes_ = 0;
        const std::size_t n = pattern_.symbols.size();
        const std::size_t ncols = base_.columns().size();
        current_.assign(n, -1);
        forbidden_.assign(n + 1, Bitset(ncols));
        dfs(0, 0.0, 0);
        std::sort(results_.begin(), results_.end(), better_matching);
        return results_;
    }

private:
    struct Cand {
        int col;
        double gain;
    };

    void dfs(std::size_t i, double gain, std::size_t matched) {
        const std::size_t n = pattern_.symbols.size();
        if (mode_ == MatchMode::Maximal && ++nodes_ > kNodeBudget && !results_.empty()) return;
        if (mode_ == MatchMode::Maximal && results_.size() >= k_) {
            const auto& worst = results_.back();
            double bound = gain + best_gain_[i];
            if (bound < worst.gain - kEps) return;
            if (bound <= worst.gain + kEps && matched + avail_[i] <= worst.matched) return;
        }
        if (i == n) {
            if (matched == 0) return;
            if (mode_ == MatchMode::Maximal && !is_maximal()) return;
            Matching m{current_, gain, matched, spread()};
            if (mode_ == MatchMode::All) {
                results_.push_back(std::move(m));
                return;
            }
            auto at = std::lower_bound(results_.begin(), results_.end(), m, better_matching);
            results_.insert(at, std::move(m));
            if (results_.size() > k_) results_.pop_back();
            return;
        }
        const Bitset& forb = forbidden_[i];
        for (const auto& c : cands_[i]) {
            if (forb.test(static_cast<std::size_t>(c.col))) continue;
            current_[i] = c.col;
            forbidden_[i + 1] = forb;
            forbidden_[i + 1] |= reach_.anc[c.col];
            dfs(i + 1, gain + c.gain, matched + 1);
        }
        current_[i] = -1;
        forbidden_[i + 1] = forb;
        dfs(i + 1, gain, matched);
    }

    int spread() const {
        int lo = -1, hi = -1;
        for (int c : current_) {
            if (c < 0) continue;
            if (lo < 0) lo = c;
            hi = c;
        }
        return hi - lo;
    }

    bool is_maximal() const {
        const std::size_t n = pattern_.symbols.size();
        Bitset after(base_.columns().size());
        for (std::size_t i = n; i-- > 0;) {
            if (current_[i] >= 0) {
                after |= reach_.desc[current_[i]];
                continue;
            }
            for (const auto& c : cands_[i]) {
                auto col = static_cast<std::size_t>(c.col);
                if (!forbidden_[i].test(col) && !after.test(col)) return false;
            }
        }
        return true;
    }

    const Alignment& base_;
    const Pattern& pattern_;
    const Reach& reach_;
    std::vector<std::vector<Cand>> cands_;
    std::vector<double> best_gain_;
    std::vector<std::size_t> avail_;
    MatchMode mode_ = MatchMode::Maximal;
    std::size_t k_ = 0;
    std::size_t nodes_ = 0;
    std::vector<int> current_;
    std::vector<Bitset> forbidden_;
    std::vector<Matching> results_;
};

std::optional<Alignment> apply_matching(const Alignment& base, const std::shared_ptr<const Pattern>& pattern,
                                        const Matching& m, const Store& store) {
    auto rows = base.rows();
    auto cols = base.columns();
    const auto row = static_cast<std::uint32_t>(rows.size());
    rows.push_back(pattern);
    for (std::size_t i = 0; i < m.assign.size(); ++i) {
        Entry e{row, static_cast<std::uint32_t>(i)};
        if (m.assign[i] >= 0) cols[m.assign[i]].push_back(e);
        else cols.push_back({e});
    }
    return Alignment::assemble(std::move(rows), std::move(cols), store);
}

std::vector<std::shared_ptr<const Pattern>> shared_patterns(const Store& store) {
    std::vector<std::shared_ptr<const Pattern>> out;
    for (const auto& p : store.patterns()) out.push_back(std::make_shared<const Pattern>(p));
    return out;
}

std::vector<Alignment> extensions(const Alignment& base, const Pattern& pattern, const Store& store, MatchMode mode) {
    auto shared = std::make_shared<const Pattern>(pattern);
    auto reach = reachability(base);
    Matcher matcher(base, pattern, store, reach);
    std::vector<Alignment> out;
    std::unordered_set<std::string> seen;
    for (const auto& m : matcher.run(mode, std::numeric_limits<std::size_t>::max())) {
        auto a = apply_matching(base, shared, m, store);
        if (a && seen.insert(a->key()).second) out.push_back(std::move(*a));
    }
    std::sort(out.begin(), out.end(), ranks_before);
    return out;
}

// Cheap summary of a candidate extension, enough to rank it before building it.
struct Candidate {
    std::size_t base;
    std::size_t pattern;
    Matching matching;
    double cd;
    std::vector<std::string> ids;
    std::size_t unmatched_content;
    std::size_t unmatched_new;
    bool complete;
};

bool lighter_before(const Candidate& a, const Candidate& b) {
    if (std::abs(a.cd - b.cd) > kEps) return a.cd > b.cd;
    if (a.ids != b.ids) return a.ids < b.ids;
    if (a.unmatched_content != b.unmatched_content) return a.unmatched_content < b.unmatched_content;
    if (a.matching.spread != b.matching.spread) return a.matching.spread < b.matching.spread;
    if (a.base != b.base) return a.base < b.base;
    if (a.pattern != b.pattern) return a.pattern < b.pattern;
    return a.matching.assign < b.matching.assign;
}

bool light_tie(const Candidate& a, const Candidate& b) {
    return std::abs(a.cd - b.cd) <= kEps && a.ids == b.ids && a.unmatched_content == b.unmatched_content;
}

} // namespace

std::vector<Alignment> extend_alignment(const Alignment& base, const Pattern& pattern, const Store& store,
                                        const SearchParams& params) {
    if (base.old_row_count() >= params.max_rows) return {};
    return extensions(base, pattern, store, MatchMode::Maximal);
}

std::vector<Alignment> all_extensions(const Alignment& base, const Pattern& pattern, const Store& store) {
    return extensions(base, pattern, store, MatchMode::All);
}

SearchResult search_alignments(const Store& store_in, const Pattern& new_pattern, const SearchParams& params) {
    if (params.beam_width == 0 || params.max_rows == 0 || params.max_alignments_kept == 0)
        throw Error("search bounds must be positive");
    if (new_pattern.symbols.empty()) throw Error("New pattern is empty");
    const Store store = store_covering(store_in, new_pattern);
    const auto patterns = shared_patterns(store);

    std::vector<double> id_cost(patterns.size(), 0.0);
    std::vector<std::size_t> content_count(patterns.size(), 0);
    for (std::size_t p = 0; p < patterns.size(); ++p) {
        for (const auto& s : patterns[p]->symbols) {
            if (s.role == Role::Id) id_cost[p] += symbol_cost(store, s.name);
            else ++content_count[p];
        }
    }

    SearchResult result;
    std::vector<Alignment> beam{Alignment::bare(new_pattern, store)};
    const Alignment fallback = beam.front();
    std::vector<Alignment> top;
    std::unordered_set<std::string> top_keys;

    auto consider_top = [&](const Alignment& a) {
        if (a.score().cd > kEps && top_keys.insert(a.key()).second) top.push_back(a);
    };
    std::vector<Alignment> any;
    std::unordered_set<std::string> any_keys;
    auto consider_any = [&](const Alignment& a) {
        if (any_keys.insert(a.key()).second) any.push_back(a);
    };
    auto consider_complete = [&](const Alignment& a) {
        if (a.is_complete() && (!result.best_complete || ranks_before(a, *result.best_complete)))
            result.best_complete = a;
    };

    auto expand = [&](const std::vector<Alignment>& beam) {
        std::vector<Candidate> cands;
        for (std::size_t b = 0; b < beam.size(); ++b) {
            const auto& base = beam[b];
            if (base.old_row_count() >= params.max_rows) continue;
            auto reach = reachability(base);
            auto base_ids = base.pattern_ids();
            const auto base_new = base.unmatched_new_count();
            const auto base_content = base.unmatched_content_count();
            const auto& cols = base.columns();
            for (std::size_t p = 0; p < patterns.size(); ++p) {
                Matcher matcher(base, *patterns[p], store, reach, true);
                for (auto& m : matcher.run(MatchMode::Maximal, params.beam_width)) {
                    std::size_t hit_new = 0, hit_content = 0;
                    for (int c : m.assign) {
                        if (c < 0 || cols[c].size() != 1) continue;
                        const auto& e = cols[c].front();
                        if (e.row == 0) ++hit_new;
                        else if (base.symbol(e).role == Role::Content) ++hit_content;
                    }
                    std::size_t own_unmatched_content = 0;
                    for (std::size_t i = 0; i < m.assign.size(); ++i)
                        if (m.assign[i] < 0 && patterns[p]->symbols[i].role == Role::Content) ++own_unmatched_content;
                    Candidate cand;
                    cand.base = b;
                    cand.pattern = p;
                    cand.cd = base.score().cd - id_cost[p] + m.gain;
                    cand.ids = base_ids;
                    cand.ids.insert(std::upper_bound(cand.ids.begin(), cand.ids.end(), patterns[p]->id),
                                    patterns[p]->id);
                    cand.unmatched_content = base_content - hit_content + own_unmatched_content;
                    cand.unmatched_new = base_new - hit_new;
                    cand.complete = cand.unmatched_new == 0 && cand.unmatched_content == 0;
                    cand.matching = std::move(m);
                    cands.push_back(std::move(cand));
                }
            }
        }
        return cands;
    };

    std::vector<Alignment> visited;
    double best_seen = -std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    for (std::size_t gen = 0; gen < params.max_rows; ++gen) {
        auto cands = expand(beam);
        if (cands.empty()) break;
        std::sort(cands.begin(), cands.end(), lighter_before);

        std::vector<Alignment> next;
        std::unordered_set<std::string> next_keys;
        std::size_t last = 0;
        std::map<std::vector<std::string>, std::size_t> per_set;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (next.size() >= params.beam_width &&
                (!light_tie(cands[i], cands[last]) || next.size() >= 2 * params.beam_width))
                break;
            if (per_set[cands[i].ids] >= kPerRowSet) continue;
            auto a = apply_matching(beam[cands[i].base], patterns[cands[i].pattern], cands[i].matching, store);
            if (!a || !next_keys.insert(a->key()).second) continue;
            ++per_set[cands[i].ids];
            last = i;
            next.push_back(std::move(*a));
        }
        // The best complete candidate may sit below the beam cut.
        const Candidate* first_complete = nullptr;
        std::size_t complete_built = 0;
        for (const auto& c : cands) {
            if (!c.complete) continue;
            if (first_complete && (!light_tie(c, *first_complete) || complete_built >= params.beam_width)) break;
            if (result.best_complete && c.cd < result.best_complete->score().cd - kEps) break;
            if (!first_complete) first_complete = &c;
            ++complete_built;
            auto a = apply_matching(beam[c.base], patterns[c.pattern], c.matching, store);
            if (a) consider_complete(*a);
        }
        std::sort(next.begin(), next.end(), ranks_before);
        if (next.size() > params.beam_width) next.resize(params.beam_width);
        visited.insert(visited.end(), next.begin(), next.end());
        for (const auto& a : next) {
            consider_top(a);
            consider_any(a);
            consider_complete(a);
        }
        std::sort(any.begin(), any.end(), ranks_before);
        if (any.size() > params.max_alignments_kept) {
            any.resize(params.max_alignments_kept);
            any_keys.clear();
            for (const auto& a : any) any_keys.insert(a.key());
        }
        const double before_best = best_seen;
        const bool had_complete = result.best_complete.has_value();
        const double before_complete = had_complete ? result.best_complete->score().cd : 0.0;
        for (const auto& a : next) best_seen = std::max(best_seen, a.score().cd);
        bool improved = best_seen > before_best + kEps ||
                        (result.best_complete &&
                         (!had_complete || result.best_complete->score().cd > before_complete + kEps));
        stale = improved ? 0 : stale + 1;
        beam = std::move(next);
        if (stale >= kPatience) break;
    }

    // No complete alignment on the way: continue from the kept alignments,
    // preferring whatever leaves the fewest symbols unmatched.
    if (!result.best_complete && !visited.empty()) {
        auto unmatched = [](const Alignment& a) { return a.unmatched_new_count() + a.unmatched_content_count(); };
        std::stable_sort(visited.begin(), visited.end(), [&](const Alignment& a, const Alignment& b) {
            if (unmatched(a) != unmatched(b)) return unmatched(a) < unmatched(b);
            return ranks_before(a, b);
        });
        std::vector<Alignment> frontier;
        std::unordered_set<std::string> start_keys;
        for (auto& a : visited) {
            if (frontier.size() >= params.beam_width) break;
            if (start_keys.insert(a.key()).second) frontier.push_back(std::move(a));
        }
        auto left = [](const Candidate& c) { return c.unmatched_new + c.unmatched_content; };
        while (!result.best_complete && !frontier.empty()) {
            auto cands = expand(frontier);
            std::vector<Candidate*> order;
            for (auto& c : cands)
                if (left(c) < unmatched(frontier[c.base]))
                    order.push_back(&c);
            std::stable_sort(order.begin(), order.end(), [&](const Candidate* a, const Candidate* b) {
                if (left(*a) != left(*b)) return left(*a) < left(*b);
                return lighter_before(*a, *b);
            });
            std::vector<Alignment> next;
            std::unordered_set<std::string> keys;
            for (const auto* c : order) {
                if (next.size() >= params.beam_width) break;
                auto a = apply_matching(frontier[c->base], patterns[c->pattern], c->matching, store);
                if (!a || !keys.insert(a->key()).second) continue;
                consider_complete(*a);
                next.push_back(std::move(*a));
            }
            frontier = std::move(next);
        }
    }

    std::sort(top.begin(), top.end(), ranks_before);
    if (top.size() > params.max_alignments_kept) top.resize(params.max_alignments_kept);
    result.ranked = top.empty() ? std::vector<Alignment>{fallback} : std::move(top);
    result.any_ranked = std::move(any);
    return result;
}

std::vector<Alignment> build_alignments(const Store& store, const Pattern& new_pattern, const SearchParams& params) {
    return search_alignments(store, new_pattern, params).ranked;
}

Alignment brute_force_best_alignment(const Store& store_in, const Pattern& new_pattern, const SearchParams& limits) {
    std::size_t total = 0;
    for (const auto& p : store_in.patterns()) total += p.symbols.size();
    if (store_in.size() > 4) throw Error("store too large for exhaustive search (" + std::to_string(store_in.size()) + " patterns)");
    if (limits.max_rows > 4) throw Error("exhaustive search is limited to 4 rows");
    if (total > 64) throw Error("store too large for exhaustive search (" + std::to_string(total) + " symbols)");
    if (new_pattern.symbols.empty()) throw Error("New pattern is empty");
    const Store store = store_covering(store_in, new_pattern);
    const auto patterns = shared_patterns(store);
    const Alignment bare = Alignment::bare(new_pattern, store);
    Alignment best = bare;
    std::unordered_set<std::string> seen;

    // Rows are added in non-decreasing pattern order: every alignment can be
    // rebuilt that way from its own sub-alignments, provided a row may join
    // with no match yet (later rows can still match it).
    auto dfs = [&](auto&& self, const Alignment& a, std::size_t first) -> void {
        if (a.old_row_count() >= limits.max_rows) return;
        auto reach = reachability(a);
        for (std::size_t p = first; p < patterns.size(); ++p) {
            Matcher matcher(a, *patterns[p], store, reach, true);
            auto matchings = matcher.run(MatchMode::All, 0);
            matchings.push_back(Matching{std::vector<int>(patterns[p]->symbols.size(), -1), 0, 0, 0});
            for (const auto& m : matchings) {
                auto next = apply_matching(a, patterns[p], m, store);
                if (!next || !seen.insert(next->key()).second) continue;
                if (ranks_before(*next, best)) best = *next;
                self(self, *next, p);
            }
        }
    };
    dfs(dfs, bare, 0);
    return best.score().cd > kEps ? best : bare;
}

} // namespace spn
