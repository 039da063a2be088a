#pragma once

#include "spn/align.hpp"
#include "spn/store.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace spn {

struct Corpus {
    std::vector<Pattern> entries;
};

/// Parses one New pattern per line. `<` and `>` are reserved for brackets
/// of learned patterns and are rejected.
Corpus parse_corpus(std::string_view text);

/// Issues system-generated ID-symbols: class symbols `%N` and per-class
/// discriminators `0`, `1`, ... Class symbols avoid every known token;
/// discriminators avoid data tokens.
class IdAllocator {
public:
    IdAllocator() = default;
    explicit IdAllocator(const std::set<std::string, std::less<>>& data_tokens);

    /// Marks every token of `store` as taken for class symbols and its
    /// terminal tokens as taken for discriminators.
    void reserve_all(const Store& store);

    std::string next_class();
    /// Next discriminator for `cls`, skipping those in `taken`.
    std::string next_discriminator(const std::string& cls, const std::set<std::string, std::less<>>& taken = {});

    /// Numeric part of a class symbol, e.g. "4" for `%4`.
    static std::string number_of(const std::string& cls);

private:
    std::set<std::string, std::less<>> reserved_;
    std::set<std::string, std::less<>> data_;
    std::size_t next_class_ = 1;
    std::map<std::string, std::size_t, std::less<>> next_disc_;
};

/// `< %k s1 ... sn >` with C-copies of the New symbols.
Pattern augment_new(const Pattern& new_pattern, IdAllocator& alloc);

/// Factors a two-row alignment (New, Old Y) into matched-run patterns,
/// per-slot class members and one abstract pattern of references.
std::vector<Pattern> derive_patterns_from_alignment(const Alignment& a, const Store& store, IdAllocator& alloc);

/// +1 frequency per Old row of `a`.
Store update_frequencies(const Store& store, const Alignment& a);

struct GrammarCandidate {
    std::vector<std::string> subset;
    double g = 0;
    double e = 0;
    double total = 0;
};

double grammar_cost(const Store& store, const std::vector<std::string>& subset);
double corpus_encoding_cost(const Store& store, const std::vector<std::string>& subset, const Corpus& corpus,
                            const SearchParams& params);
GrammarCandidate evaluate_subset(const Store& store, const std::vector<std::string>& subset, const Corpus& corpus,
                                 const SearchParams& params);

/// Ids of the patterns that `pattern_id` references, directly or not.
std::set<std::string> reference_closure(const Store& store, const std::string& pattern_id);

/// Greedy forward selection minimizing G + E. Each step adds one pattern
/// together with everything it references.
GrammarCandidate select_grammar(const Store& store, const Corpus& corpus, const SearchParams& params);

enum class LearnAction { Augment, Derive, Match };

std::string_view action_name(LearnAction action);

struct LearnEntryRecord {
    std::size_t pass = 0;
    std::size_t index = 0;
    LearnAction action = LearnAction::Augment;
    std::vector<std::string> created;
    double cd = 0;
};

struct LearnPassRecord {
    std::size_t pass = 0;
    GrammarCandidate selection;
    /// Sum of N_o over the corpus, costed in the same store as the selection.
    double raw_bits = 0;
    std::vector<std::string> purged;
    bool retained_all = false;
};

struct LearnOptions {
    std::size_t passes = 5;
    CostMode mode = CostMode::Fixed;
};

struct LearnResult {
    Store store;
    GrammarCandidate selection;
    double raw_bits = 0;
    std::vector<LearnEntryRecord> entries;
    std::vector<LearnPassRecord> passes;
};

LearnResult learn(const Corpus& corpus, const SearchParams& params, const LearnOptions& options = {});

struct RandomCorpusLimits {
    std::size_t alphabet = 10;
    std::size_t max_length = 12;
    std::size_t max_sentences = 8;
};

/// Sentences built by chaining a few random words over letters a, b, c, ...
/// The same seed gives the same corpus on every platform.
Corpus random_corpus(std::uint64_t seed, const RandomCorpusLimits& limits = {});

} // namespace spn
