#include "spn/store.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spn {

namespace {

unsigned bits_for(std::size_t n) {
    unsigned bits = 0;
    while (bits < 64 && (std::size_t{1} << bits) < n) ++bits;
    return std::max(1u, bits);
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

} // namespace

CostModel CostModel::fixed(std::size_t alphabet_size, std::optional<unsigned> override_bits) {
    CostModel m;
    m.mode_ = CostMode::Fixed;
    if (override_bits) {
        if (*override_bits == 0) throw Error("fixed bit cost must be positive");
        m.fixed_bits_ = *override_bits;
        m.overridden_ = true;
    } else {
        m.fixed_bits_ = bits_for(alphabet_size);
    }
    return m;
}

CostModel CostModel::frequency(std::map<std::string, std::uint64_t, std::less<>> counts) {
    CostModel m;
    m.mode_ = CostMode::Frequency;
    for (auto& [name, c] : counts) {
        if (c == 0) c = 1;
        m.total_ += c;
    }
    m.counts_ = std::move(counts);
    return m;
}

double CostModel::cost(std::string_view name) const {
    if (mode_ == CostMode::Fixed) return fixed_bits_;
    auto it = counts_.find(name);
    if (it == counts_.end()) throw UnknownTokenError(name);
    return -std::log2(static_cast<double>(it->second) / static_cast<double>(total_));
}

Store::Store(std::vector<Pattern> patterns, Options options) : patterns_(std::move(patterns)), options_(std::move(options)) {
    index_patterns();
    alphabet_ = options_.extra_alphabet;
    std::map<std::string, std::uint64_t, std::less<>> counts;
    for (const auto& p : patterns_) {
        for (const auto& s : p.symbols) {
            alphabet_.insert(s.name);
            counts[s.name] += std::max<std::uint64_t>(1, p.frequency);
        }
    }
    if (options_.mode == CostMode::Fixed) {
        costs_ = CostModel::fixed(alphabet_.size(), options_.fixed_bits);
    } else {
        for (const auto& t : alphabet_) counts.try_emplace(t, 1);
        costs_ = CostModel::frequency(std::move(counts));
    }
}

void Store::index_patterns() {
    std::stable_sort(patterns_.begin(), patterns_.end(), [](const Pattern& a, const Pattern& b) { return a.id < b.id; });
    index_.clear();
    id_tokens_.clear();
    for (std::size_t i = 0; i < patterns_.size(); ++i) {
        index_.try_emplace(patterns_[i].id, i);
        for (const auto& s : patterns_[i].symbols)
            if (s.role == Role::Id) id_tokens_.insert(s.name);
    }
}

Store Store::restricted_to(const std::vector<std::string>& ids) const {
    Store out = *this;
    out.patterns_.clear();
    for (const auto& id : ids) {
        const auto* p = find(id);
        if (!p) throw Error("unknown pattern id '" + id + "'");
        out.patterns_.push_back(*p);
    }
    out.index_patterns();
    return out;
}

const Pattern* Store::find(std::string_view id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &patterns_[it->second];
}

bool Store::is_terminal(std::string_view token) const { return knows(token) && !id_tokens_.contains(token); }

Store Store::with_patterns(std::vector<Pattern> patterns) const { return Store(std::move(patterns), options_); }

Store Store::with_mode(CostMode mode) const {
    auto opts = options_;
    opts.mode = mode;
    return Store(patterns_, opts);
}

Store Store::with_extra_tokens(const std::vector<std::string>& tokens) const {
    auto opts = options_;
    opts.extra_alphabet.insert(tokens.begin(), tokens.end());
    return Store(patterns_, opts);
}

Store parse_grammar_file(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    Store::Options opts;
    std::vector<Pattern> patterns;
    std::set<std::string, std::less<>> seen;
    std::vector<std::size_t> auto_ids;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_tokens(line);
        if (toks.empty()) continue;
        if (toks.front() == "#costs") {
            if (toks.size() >= 2 && toks[1] == "frequency" && toks.size() == 2) {
                opts.mode = CostMode::Frequency;
            } else if (toks.size() >= 2 && toks[1] == "fixed" && toks.size() <= 3) {
                opts.mode = CostMode::Fixed;
                if (toks.size() == 3) {
                    if (!all_digits(toks[2]) || toks[2].size() > 2 || std::stoul(toks[2]) == 0)
                        throw ParseError(lineno, "bad fixed bit cost '" + toks[2] + "'");
                    opts.fixed_bits = static_cast<unsigned>(std::stoul(toks[2]));
                }
            } else {
                throw ParseError(lineno, "bad #costs directive");
            }
            continue;
        }
        if (toks.front() == "#alphabet") {
            for (std::size_t i = 1; i < toks.size(); ++i) {
                if (!is_valid_token(toks[i])) throw ParseError(lineno, "invalid token '" + toks[i] + "'");
                opts.extra_alphabet.insert(toks[i]);
            }
            continue;
        }
        if (toks.front().starts_with("#")) continue;

        auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError(lineno, "missing ':' after pattern header");
        auto head = split_tokens(std::string_view(line).substr(0, colon));
        auto body = split_tokens(std::string_view(line).substr(colon + 1));

        Pattern p;
        std::string freq_tok;
        if (head.size() == 1) {
            freq_tok = head[0];
        } else if (head.size() == 2 || head.size() == 3) {
            p.id = head[0];
            freq_tok = head[1];
            if (!is_valid_token(p.id)) throw ParseError(lineno, "invalid pattern id '" + p.id + "'");
            if (head.size() == 3) {
                if (head[2] == "user") p.origin = Origin::User;
                else if (head[2] == "learned") p.origin = Origin::Learned;
                else if (head[2] == "augmented") p.origin = Origin::Augmented;
                else throw ParseError(lineno, "unknown origin '" + head[2] + "'");
            }
        } else {
            throw ParseError(lineno, "malformed pattern header");
        }
        if (!all_digits(freq_tok) || freq_tok.size() > 18 || std::stoull(freq_tok) == 0)
            throw ParseError(lineno, "frequency must be a positive integer, got '" + freq_tok + "'");
        p.frequency = std::stoull(freq_tok);

        if (body.empty()) throw ParseError(lineno, "pattern has no symbols");
        for (const auto& tok : body) {
            auto slash = tok.rfind('/');
            if (slash == std::string::npos) throw ParseError(lineno, "symbol '" + tok + "' lacks a role");
            auto name = tok.substr(0, slash);
            auto role = tok.substr(slash + 1);
            if (!is_valid_token(name)) throw ParseError(lineno, "invalid token '" + name + "'");
            if (role == "I") p.symbols.push_back({name, Role::Id});
            else if (role == "C") p.symbols.push_back({name, Role::Content});
            else throw ParseError(lineno, "unknown role '" + role + "' in '" + tok + "'");
        }
        if (p.id_symbol_count() == 0) throw ParseError(lineno, "pattern has no ID-symbols");
        if (!p.id.empty()) {
            if (!seen.insert(p.id).second) throw ParseError(lineno, "duplicate id '" + p.id + "'");
        } else {
            auto_ids.push_back(patterns.size());
        }
        patterns.push_back(std::move(p));
    }
    std::size_t counter = 0;
    for (auto idx : auto_ids) {
        std::string id;
        do {
            id = "p" + std::to_string(++counter);
        } while (seen.contains(id));
        seen.insert(id);
        patterns[idx].id = id;
    }
    return Store(std::move(patterns), std::move(opts));
}

std::string serialize_store(const Store& store) {
    std::ostringstream out;
    const auto& opts = store.options();
    if (opts.mode == CostMode::Frequency) {
        out << "#costs frequency\n";
    } else if (opts.fixed_bits) {
        out << "#costs fixed " << *opts.fixed_bits << "\n";
    } else {
        out << "#costs fixed\n";
    }
    std::set<std::string, std::less<>> used;
    for (const auto& p : store.patterns())
        for (const auto& s : p.symbols) used.insert(s.name);
    std::vector<std::string> extra;
    for (const auto& t : store.alphabet())
        if (!used.contains(t)) extra.push_back(t);
    if (!extra.empty()) out << "#alphabet " << join(extra) << "\n";
    for (const auto& p : store.patterns()) {
        out << p.id << ' ' << p.frequency;
        if (p.origin != Origin::User) out << ' ' << origin_name(p.origin);
        out << " :";
        for (const auto& s : p.symbols) out << ' ' << s.name << '/' << role_name(s.role);
        out << '\n';
    }
    return out.str();
}

double symbol_cost(const Store& store, std::string_view name) {
    if (!store.knows(name)) throw UnknownTokenError(name);
    return store.cost_model().cost(name);
}

double pattern_size_bits(const Store& store, std::span<const std::string> tokens) {
    double total = 0;
    for (const auto& t : tokens) total += symbol_cost(store, t);
    return total;
}

double pattern_size_bits(const Store& store, std::span<const Symbol> symbols) {
    double total = 0;
    for (const auto& s : symbols) total += symbol_cost(store, s.name);
    return total;
}

std::vector<Diagnostic> validate_store(const Store& store) {
    std::vector<Diagnostic> out;
    std::set<std::string, std::less<>> ids;
    for (const auto& p : store.patterns()) {
        if (!ids.insert(p.id).second) out.push_back({"duplicate id", "pattern id '" + p.id + "' occurs more than once"});
        if (p.symbols.empty()) {
            out.push_back({"empty pattern", "pattern '" + p.id + "' has no symbols"});
            continue;
        }
        if (p.frequency == 0) out.push_back({"zero frequency", "pattern '" + p.id + "' has frequency 0"});
        bool has_id = false;
        for (const auto& s : p.symbols) {
            if (s.role == Role::Id) has_id = true;
            if (s.role == Role::Data)
                out.push_back({"data symbol in Old", "pattern '" + p.id + "' contains role-less symbol '" + s.name + "'"});
            if (!is_valid_token(s.name))
                out.push_back({"invalid token", "pattern '" + p.id + "' contains invalid token '" + s.name + "'"});
            if (!store.knows(s.name))
                out.push_back({"token outside alphabet", "token '" + s.name + "' is not in the alphabet"});
        }
        if (!has_id) out.push_back({"no ID-symbols", "pattern '" + p.id + "' has no ID-symbols"});
    }
    return out;
}

} // namespace spn
