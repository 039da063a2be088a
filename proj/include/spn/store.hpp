#pragma once

#include "spn/pattern.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spn {

enum class CostMode { Fixed, Frequency };

/// Bit cost per symbol name.
///
/// Fixed: every known token costs the same number of bits, by default
/// ceil(log2(alphabet size)) with a floor of one bit.
/// Frequency: cost(name) = -log2(count(name) / total), counts tallied over
/// the stored patterns weighted by pattern frequency. Alphabet tokens that
/// occur in no pattern count once so that every known token has finite cost.
class CostModel {
public:
    CostModel() = default;

    static CostModel fixed(std::size_t alphabet_size, std::optional<unsigned> override_bits = {});
    static CostModel frequency(std::map<std::string, std::uint64_t, std::less<>> counts);

    CostMode mode() const { return mode_; }
    unsigned fixed_bits() const { return fixed_bits_; }
    bool fixed_bits_overridden() const { return overridden_; }
    const std::map<std::string, std::uint64_t, std::less<>>& counts() const { return counts_; }
    std::uint64_t total_count() const { return total_; }

    /// Cost of a token already known to be in the alphabet.
    double cost(std::string_view name) const;

private:
    CostMode mode_ = CostMode::Fixed;
    unsigned fixed_bits_ = 1;
    bool overridden_ = false;
    std::map<std::string, std::uint64_t, std::less<>> counts_;
    std::uint64_t total_ = 0;
};

struct Diagnostic {
    std::string code;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// The repository of Old patterns plus alphabet and cost model. Immutable
/// once built; the with_* helpers return new versions.
struct StoreOptions {
    CostMode mode = CostMode::Fixed;
    std::optional<unsigned> fixed_bits;
    /// Tokens in the alphabet beyond those appearing in patterns.
    std::set<std::string, std::less<>> extra_alphabet;
};

class Store {
public:
    using Options = StoreOptions;

    Store() = default;
    explicit Store(std::vector<Pattern> patterns, Options options = {});

    const std::vector<Pattern>& patterns() const { return patterns_; }
    std::size_t size() const { return patterns_.size(); }
    bool empty() const { return patterns_.empty(); }
    const std::set<std::string, std::less<>>& alphabet() const { return alphabet_; }
    const CostModel& cost_model() const { return costs_; }
    const Options& options() const { return options_; }

    const Pattern* find(std::string_view id) const;
    bool knows(std::string_view token) const { return alphabet_.contains(token); }

    /// Tokens that occur with role Id in at least one pattern.
    const std::set<std::string, std::less<>>& id_tokens() const { return id_tokens_; }
    /// Alphabet tokens that never occur as an Id symbol.
    bool is_terminal(std::string_view token) const;

    Store with_patterns(std::vector<Pattern> patterns) const;
    Store with_mode(CostMode mode) const;
    Store with_extra_tokens(const std::vector<std::string>& tokens) const;
    /// Only the listed patterns, keeping this store's alphabet and cost model.
    Store restricted_to(const std::vector<std::string>& ids) const;

private:
    void index_patterns();

    std::vector<Pattern> patterns_;
    Options options_;
    std::set<std::string, std::less<>> alphabet_;
    std::set<std::string, std::less<>> id_tokens_;
    std::map<std::string, std::size_t, std::less<>> index_;
    CostModel costs_;
};

/// Parses the grammar file format:
///   #costs fixed [BITS] | #costs frequency   (optional header)
///   #alphabet tok ...                        (optional extra tokens)
///   # comment
///   [id] freq [origin] : sym/I sym/C ...
Store parse_grammar_file(std::string_view text);

/// Canonical form: patterns sorted by id, one per line.
std::string serialize_store(const Store& store);

double symbol_cost(const Store& store, std::string_view name);
double pattern_size_bits(const Store& store, std::span<const std::string> tokens);
double pattern_size_bits(const Store& store, std::span<const Symbol> symbols);

std::vector<Diagnostic> validate_store(const Store& store);

} // namespace spn
