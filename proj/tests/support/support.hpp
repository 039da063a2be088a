#pragma once

#include "spn/align.hpp"
#include "spn/learn.hpp"
#include "spn/neural.hpp"
#include "spn/store.hpp"

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace spn::testing {

std::string fixture_path(const std::string& name);
std::string read_text(const std::string& path);
Store load_fixture(const std::string& name);

struct FixtureCase {
    std::string grammar;
    std::string input;
    /// Pattern ids of the best alignment, sorted.
    std::vector<std::string> patterns;
};

/// Every shipped grammar with the sentence it is meant to analyse.
const std::vector<FixtureCase>& fixture_cases();

/// Checks an alignment against the alignment rules without using the
/// engine's own helpers. Empty when legal.
std::vector<std::string> legality_violations(const Alignment& a);

/// Single-entry ID columns, left to right.
std::vector<std::string> scan_encoding(const Alignment& a);

/// N_o, N_e and CD recomputed from the rows and columns alone.
AlignmentScore rescore(const Store& store, const Alignment& a);

/// Small random stores over a handful of data and ID tokens.
struct RandomStoreShape {
    int max_patterns = 4;
    int min_length = 2;
    int max_length = 8;
    int min_new = 2;
    int max_new = 7;
};

struct RandomInstance {
    Store store;
    Pattern new_pattern;
};

RandomInstance random_instance(std::uint32_t seed, const RandomStoreShape& shape = {});

/// Every non-empty order-preserving set of (New position, pattern position)
/// pairs joining equal names.
std::vector<std::set<std::pair<std::uint32_t, std::uint32_t>>> brute_matchings(const Pattern& new_pattern,
                                                                               const Pattern& pattern);

/// Alignment of `new_pattern` with one row holding `pattern`, built from
/// a set of matched pairs.
Alignment two_row(const Pattern& new_pattern, const Pattern& pattern,
                  const std::set<std::pair<std::uint32_t, std::uint32_t>>& pairs, const Store& store);

/// Exhaustive minimum of G + E over every subset closed under references.
GrammarCandidate exhaustive_selection(const Store& store, const Corpus& corpus, const SearchParams& params);

/// Every neuron of a network is a receptor, in exactly one assembly, or in
/// the pool, and no two of those hold.
std::vector<std::string> membership_violations(const Network& net);

Pattern old_pattern(const std::string& id, const std::string& text);

/// Matched columns of the sentence analysis, as "row-id:pos row-id:pos".
const std::vector<std::string>& sentence_topology();
std::vector<std::string> matched_columns(const Alignment& a);

Corpus boygirl_corpus();

/// Patterns learned in one pass over the boy and girl corpus plus one
/// whole-sentence pattern per sentence.
Store boygirl_pool();

/// Grammar text with generated symbols renamed by first appearance, so
/// that two grammars differing only in generated names compare equal.
std::string canonical_grammar(const Store& store, const std::set<std::string, std::less<>>& data_tokens);

/// Applies `ops` random create or purge steps. Purges never remove the
/// last source of a reference that another assembly still uses.
Network random_assembly_ops(Network net, std::uint32_t seed, int ops);

} // namespace spn::testing
