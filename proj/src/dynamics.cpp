#include "spn/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace spn {

namespace {

using Span = std::pair<std::uint32_t, std::uint32_t>;

// Who holds a source: receptor locations and ID-neurons of fired assemblies
// each feed at most one assembly at a time.
struct Claims {
    std::map<std::uint32_t, std::uint32_t> locations;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> ids;

    bool free_for(const Source& s, std::uint32_t owner) const {
        if (s.kind == Source::Kind::Receptor) {
            auto it = locations.find(s.where);
            return it == locations.end() || it->second == owner;
        }
        auto it = ids.find({s.where, s.position});
        return it == ids.end() || it->second == owner;
    }
    void take(const std::vector<Source>& binding, std::uint32_t owner) {
        for (const auto& s : binding) {
            if (s.kind == Source::Kind::Receptor) locations[s.where] = owner;
            else if (s.kind == Source::Kind::Reference) ids[{s.where, s.position}] = owner;
        }
    }
    void release(std::uint32_t owner) {
        std::erase_if(locations, [&](const auto& kv) { return kv.second == owner; });
        std::erase_if(ids, [&](const auto& kv) { return kv.second == owner; });
    }
};

struct Evaluation {
    double weighted = 0;
    std::size_t bound = 0;
    std::optional<Span> span;
};

class Binder {
public:
    Binder(const Network& net, const NetworkState& state, const std::map<std::uint32_t, std::optional<Span>>& spans)
        : net_(net), state_(state), spans_(spans) {}

    // Best binding of the C-neurons of `aid` given the current claims.
    std::pair<std::vector<Source>, Evaluation> bind(std::uint32_t aid, const Claims& claims) {
        const auto& a = net_.assemblies().at(aid);
        names_.clear();
        for (const auto& s : a.pattern.symbols)
            if (s.role != Role::Id) names_.push_back(&s.name);
        candidates_.assign(names_.size(), {});
        for (std::size_t j = 0; j < names_.size(); ++j) {
            for (std::uint32_t loc = 0; loc < state_.input.size(); ++loc) {
                Source s{Source::Kind::Receptor, loc, 0};
                if (state_.input[loc] == *names_[j] && claims.free_for(s, aid)) candidates_[j].push_back(s);
            }
            for (const auto& [sid, st] : state_.assemblies) {
                if (sid == aid || !st.fired) continue;
                const auto& syms = net_.assemblies().at(sid).pattern.symbols;
                for (std::uint32_t i = 0; i < syms.size(); ++i) {
                    Source s{Source::Kind::Reference, sid, i};
                    if (syms[i].role == Role::Id && syms[i].name == *names_[j] && claims.free_for(s, aid))
                        candidates_[j].push_back(s);
                }
            }
        }
        // Length of the longest group that could start at each candidate.
        runs_.assign(names_.size(), {});
        for (std::size_t j = names_.size(); j-- > 0;) {
            runs_[j].assign(candidates_[j].size(), 1);
            if (j + 1 == names_.size()) continue;
            for (std::size_t c = 0; c < candidates_[j].size(); ++c) {
                Group g;
                g.open = true;
                g.last = candidates_[j][c];
                for (std::size_t d = 0; d < candidates_[j + 1].size(); ++d)
                    if (continues(g, candidates_[j + 1][d])) runs_[j][c] = std::max(runs_[j][c], 1 + runs_[j + 1][d]);
            }
        }
        kappa_ = net_.params().kappa;
        current_.assign(names_.size(), Source{});
        best_ = current_;
        best_eval_ = {};
        used_locations_.clear();
        nodes_ = 0;
        Group g;
        search(0, g, Evaluation{});
        return {best_, best_eval_};
    }

private:
    struct Group {
        bool open = false;
        Source last;
        std::optional<Span> span;
        std::optional<std::uint32_t> prev_hi;
        double weight = 1;
        std::size_t count = 0;
        // A reference group that stops short of symbols its source could
        // still supply loses its coherence bonus.
        bool maximal = true;
    };

    // Does assembly `sid` hold an ID-neuron named `name` strictly between
    // positions lo and hi?
    bool offers(std::uint32_t sid, const std::string& name, std::int64_t lo, std::int64_t hi) const {
        const auto& syms = net_.assemblies().at(sid).pattern.symbols;
        for (std::int64_t i = lo + 1; i < hi && i < static_cast<std::int64_t>(syms.size()); ++i)
            if (i >= 0 && syms[i].role == Role::Id && syms[i].name == name) return true;
        return false;
    }

    // Closes the open group before C-neuron `next` (or at the end).
    void settle(Group& g, std::size_t next, Evaluation& e) const {
        if (!g.open) return;
        if (g.span) g.prev_hi = g.span->second;
        if (g.last.kind == Source::Kind::Reference && g.weight > 1) {
            bool ok = g.maximal;
            if (ok && next < names_.size())
                ok = !offers(g.last.where, *names_[next], g.last.position, std::numeric_limits<std::int64_t>::max());
            if (!ok) e.weighted -= static_cast<double>(g.count) * (g.weight - 1);
        }
        g.open = false;
    }

    static constexpr std::size_t kNodeBudget = 50000;

    bool continues(const Group& g, const Source& s) const {
        if (!g.open || g.last.kind != s.kind) return false;
        if (s.kind == Source::Kind::Receptor) return s.where == g.last.where + 1;
        return s.where == g.last.where && s.position > g.last.position;
    }

    std::optional<Span> source_span(const Source& s) const {
        if (s.kind == Source::Kind::Receptor) return Span{s.where, s.where};
        auto it = spans_.find(s.where);
        return it == spans_.end() ? std::nullopt : it->second;
    }

    static std::optional<Span> hull(std::optional<Span> a, std::optional<Span> b) {
        if (!a) return b;
        if (!b) return a;
        return Span{std::min(a->first, b->first), std::max(a->second, b->second)};
    }

    bool better(const Evaluation& e) const {
        if (e.weighted > best_eval_.weighted + 1e-12) return true;
        if (e.weighted < best_eval_.weighted - 1e-12) return false;
        return e.bound > best_eval_.bound;
    }

    void search(std::size_t j, Group g, Evaluation e) {
        if (++nodes_ > kNodeBudget) return;
        if (j == names_.size()) {
            settle(g, j, e);
            if (better(e)) {
                best_ = current_;
                best_eval_ = e;
            }
            return;
        }
        const double remaining = static_cast<double>(names_.size() - j) * (1 + kappa_);
        if (e.weighted + remaining < best_eval_.weighted - 1e-12) return;
        if (e.weighted + remaining < best_eval_.weighted + 1e-12 && e.bound + (names_.size() - j) <= best_eval_.bound)
            return;

        // Try sources that extend the open group first, then the most
        // promising fresh groups.
        std::optional<std::uint32_t> hi = g.open && g.span ? std::optional(g.span->second) : g.prev_hi;
        std::vector<std::pair<double, std::size_t>> ranked;
        for (std::size_t c = 0; c < candidates_[j].size(); ++c) {
            const auto& s = candidates_[j][c];
            double estimate;
            if (continues(g, s)) {
                estimate = 1e9 + runs_[j][c];
            } else {
                auto sp = source_span(s);
                bool coherent = sp && (!hi || sp->first == *hi + 1);
                estimate = runs_[j][c] * (coherent ? 1 + kappa_ : 1);
            }
            ranked.emplace_back(-estimate, c);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& x, const auto& y) { return x.first < y.first; });
        std::vector<const Source*> order;
        for (const auto& [score, c] : ranked) order.push_back(&candidates_[j][c]);

        for (const Source* s : order) {
            if (s->kind == Source::Kind::Receptor && used_locations_.contains(s->where)) continue;
            Group ng = g;
            Evaluation ne = e;
            if (continues(g, *s)) {
                if (s->kind == Source::Kind::Receptor) ng.span->second = s->where;
                ++ng.count;
            } else {
                settle(ng, j, ne);
                ng.open = true;
                ng.count = 1;
                ng.span = source_span(*s);
                bool first = !ng.prev_hi;
                bool coherent = ng.span && (first || (ng.prev_hi && ng.span->first == *ng.prev_hi + 1));
                ng.weight = coherent ? 1 + kappa_ : 1;
                ng.maximal = s->kind != Source::Kind::Reference || j == 0 ||
                             !offers(s->where, *names_[j - 1], -1, s->position);
            }
            ng.last = *s;
            ne.weighted += ng.weight;
            ++ne.bound;
            ne.span = hull(ne.span, source_span(*s));
            current_[j] = *s;
            if (s->kind == Source::Kind::Receptor) used_locations_.insert(s->where);
            search(j + 1, ng, ne);
            if (s->kind == Source::Kind::Receptor) used_locations_.erase(s->where);
            current_[j] = Source{};
            if (nodes_ > kNodeBudget) return;
        }
        // Leave this C-neuron silent; a gap closes the open group.
        Group ng = g;
        Evaluation ne = e;
        settle(ng, j, ne);
        search(j + 1, ng, ne);
    }

    const Network& net_;
    const NetworkState& state_;
    const std::map<std::uint32_t, std::optional<Span>>& spans_;
    std::vector<const std::string*> names_;
    std::vector<std::vector<Source>> candidates_;
    std::vector<std::vector<std::size_t>> runs_;
    std::vector<Source> current_;
    std::vector<Source> best_;
    Evaluation best_eval_;
    std::set<std::uint32_t> used_locations_;
    std::size_t nodes_ = 0;
    double kappa_ = 0;
};

double responsiveness(const Network& net, const PatternAssembly& a) {
    return 1 + net.params().lambda * std::log2(std::max<double>(1, static_cast<double>(a.pattern.frequency)));
}

std::size_t content_count(const PatternAssembly& a) {
    return static_cast<std::size_t>(std::count_if(a.pattern.symbols.begin(), a.pattern.symbols.end(),
                                                  [](const Symbol& s) { return s.role != Role::Id; }));
}

double activation_of(const Network& net, const PatternAssembly& a, const Evaluation& e) {
    auto n = content_count(a);
    if (n == 0) return 0;
    return responsiveness(net, a) * e.weighted / static_cast<double>(n);
}

} // namespace

NetworkState present_input(const Network& network, const std::vector<std::string>& tokens) {
    if (tokens.size() > network.array_length())
        throw Error("input of " + std::to_string(tokens.size()) + " tokens overflows an array of " +
                    std::to_string(network.array_length()));
    NetworkState state;
    state.input = tokens;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto r = network.receptor(i, tokens[i]);
        if (!r) throw UnknownTokenError(tokens[i]);
        state.active_receptors.push_back(*r);
    }
    for (const auto& [aid, a] : network.assemblies()) {
        AssemblyState s;
        s.binding.assign(content_count(a), Source{});
        state.assemblies.emplace(aid, std::move(s));
    }
    return state;
}

NetworkState step(const Network& network, const NetworkState& state) {
    NetworkState next = state;
    next.tick = state.tick + 1;
    next.ignitions_last_tick = 0;

    std::map<std::uint32_t, std::optional<Span>> spans;
    Claims claims;
    for (const auto& [aid, st] : state.assemblies) {
        spans[aid] = st.span;
        if (st.fired) claims.take(st.binding, aid);
    }
    Binder binder(network, state, spans);

    // Fired assemblies keep their sources and may pick up newly fired ones.
    for (auto& [aid, st] : next.assemblies) {
        if (!st.fired) continue;
        claims.release(aid);
        auto [binding, eval] = binder.bind(aid, claims);
        st.binding = binding;
        st.span = eval.span;
        st.activation = activation_of(network, network.assemblies().at(aid), eval);
        claims.take(binding, aid);
    }

    struct Candidate {
        std::uint32_t id;
        double activation;
        std::size_t bound;
        std::vector<Source> binding;
        std::optional<Span> span;
    };
    std::vector<Candidate> candidates;
    for (auto& [aid, st] : next.assemblies) {
        if (st.fired) continue;
        const auto& a = network.assemblies().at(aid);
        auto [binding, eval] = binder.bind(aid, claims);
        st.activation = activation_of(network, a, eval);
        if (st.activation >= a.threshold - 1e-12) candidates.push_back({aid, st.activation, eval.bound, binding, eval.span});
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& x, const Candidate& y) {
        if (std::abs(x.activation - y.activation) > 1e-12) return x.activation > y.activation;
        if (x.bound != y.bound) return x.bound > y.bound;
        const auto& px = network.assemblies().at(x.id).pattern.id;
        const auto& py = network.assemblies().at(y.id).pattern.id;
        if (px != py) return px < py;
        return x.id < y.id;
    });
    // Winner takes all: a candidate sharing any source with an earlier
    // winner stays silent this tick.
    for (const auto& c : candidates) {
        bool clash = std::any_of(c.binding.begin(), c.binding.end(), [&](const Source& s) {
            return s.kind != Source::Kind::None && !claims.free_for(s, c.id);
        });
        if (clash) continue;
        auto& st = next.assemblies.at(c.id);
        st.fired = true;
        st.fired_at = next.tick;
        st.binding = c.binding;
        st.span = c.span;
        claims.take(c.binding, c.id);
        ++next.ignitions_last_tick;
    }
    return next;
}

Recognition recognize(const Network& network, const std::vector<std::string>& tokens, std::size_t max_ticks) {
    Recognition out;
    auto state = present_input(network, tokens);
    for (std::size_t t = 0; t < max_ticks; ++t) {
        state = step(network, state);
        TickRecord rec;
        rec.tick = state.tick;
        for (const auto& [aid, st] : state.assemblies)
            rec.assemblies.push_back({network.assemblies().at(aid).pattern.id, st.activation, st.fired});
        out.trace.push_back(std::move(rec));
        if (state.ignitions_last_tick == 0) break;
    }
    std::set<std::string> fired;
    for (const auto& [aid, st] : state.assemblies)
        if (st.fired) fired.insert(network.assemblies().at(aid).pattern.id);
    out.fired.assign(fired.begin(), fired.end());
    out.final_state = std::move(state);
    return out;
}

} // namespace spn
