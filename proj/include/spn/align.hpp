#pragma once

#include "spn/pattern.hpp"
#include "spn/store.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spn {

struct Entry {
    std::uint32_t row = 0;
    std::uint32_t pos = 0;

    friend auto operator<=>(const Entry&, const Entry&) = default;
};

/// Entries sorted by row; at most one entry per row.
using Column = std::vector<Entry>;

struct AlignmentScore {
    double n_o = 0;
    double n_e = 0;
    double cd = 0;
};

struct SearchParams {
    std::size_t beam_width = 20;
    /// Upper bound on the number of Old rows.
    std::size_t max_rows = 32;
    std::size_t max_alignments_kept = 10;
};

/// Row 0 is the New pattern; rows 1..n hold Old patterns (the same pattern
/// may occupy several rows). Columns are kept in a canonical left-to-right
/// order and Old rows in a canonical order, so equal alignments compare
/// equal through key().
class Alignment {
public:
    Alignment() = default;

    const std::vector<std::shared_ptr<const Pattern>>& rows() const { return rows_; }
    const std::vector<Column>& columns() const { return columns_; }
    const AlignmentScore& score() const { return score_; }
    const std::string& key() const { return key_; }

    const Pattern& row(std::size_t r) const { return *rows_[r]; }
    const Symbol& symbol(const Entry& e) const { return rows_[e.row]->symbols[e.pos]; }
    std::size_t old_row_count() const { return rows_.empty() ? 0 : rows_.size() - 1; }
    bool is_fallback() const { return old_row_count() == 0; }

    /// Pattern ids of the Old rows, sorted.
    std::vector<std::string> pattern_ids() const;
    std::size_t matched_column_count() const;
    std::size_t unmatched_new_count() const;
    std::size_t unmatched_content_count() const;
    /// Every New symbol matched and every Old C-symbol matched.
    bool is_complete() const { return !is_fallback() && unmatched_new_count() == 0 && unmatched_content_count() == 0; }

    /// Puts rows and columns into canonical order. Returns nullopt when the
    /// columns cannot be ordered consistently with every row (crossing
    /// matches). Every symbol of every row must occur in exactly one column.
    static std::optional<Alignment> assemble(std::vector<std::shared_ptr<const Pattern>> rows,
                                             std::vector<Column> columns, const Store& store);

    static Alignment bare(const Pattern& new_pattern, const Store& store);

    void rescore(const Store& store);

private:
    std::vector<std::shared_ptr<const Pattern>> rows_;
    std::vector<Column> columns_;
    AlignmentScore score_;
    std::string key_;
};

/// Search ranking: CD descending, fewer Old rows, lexicographically smaller
/// sorted pattern-id sequence, fewer unmatched Old C-symbols, canonical key.
bool ranks_before(const Alignment& a, const Alignment& b);

bool match_symbols(const Symbol& a, const Symbol& b);

/// All maximal legal ways of adding `pattern` as a new row with at least one
/// matched column. A column may hold at most one ID-symbol.
std::vector<Alignment> extend_alignment(const Alignment& base, const Pattern& pattern, const Store& store,
                                        const SearchParams& params);

/// Every legal non-empty matching, maximal or not.
std::vector<Alignment> all_extensions(const Alignment& base, const Pattern& pattern, const Store& store);

struct SearchResult {
    /// CD-positive alignments in rank order, or the bare fallback alone.
    std::vector<Alignment> ranked;
    /// Best alignment found that matches every New and Old C-symbol.
    std::optional<Alignment> best_complete;
    /// Best non-fallback alignments whatever their CD, in rank order.
    std::vector<Alignment> any_ranked;
};

SearchResult search_alignments(const Store& store, const Pattern& new_pattern, const SearchParams& params);
std::vector<Alignment> build_alignments(const Store& store, const Pattern& new_pattern, const SearchParams& params);

/// Names of single-entry ID columns, left to right.
std::vector<std::string> derive_encoding(const Alignment& a);

/// N_o = bits of New. N_e = bits of the encoding plus bits of New symbols
/// left unmatched; the fallback alignment has N_e = N_o.
AlignmentScore score_alignment(const Store& store, const Alignment& a);

std::vector<std::pair<Alignment, double>> relative_probabilities(const std::vector<Alignment>& ranked);

/// Names of columns holding a C-symbol whose token never serves as an
/// ID-symbol in the store.
std::vector<std::string> realize_surface(const Alignment& a, const Store& store);

/// Exhaustive search for small stores: at most 4 patterns, 64 symbols in
/// total and `limits.max_rows` at most 4. Throws Error beyond that.
Alignment brute_force_best_alignment(const Store& store, const Pattern& new_pattern, const SearchParams& limits);

std::string render_alignment(const Alignment& a);

/// Store whose alphabet also covers the New pattern's tokens.
Store store_covering(const Store& store, const Pattern& new_pattern);

} // namespace spn
