#include "spn/align.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace spn {

namespace {

constexpr double kEps = 1e-9;

} // namespace

std::vector<std::string> Alignment::pattern_ids() const {
    std::vector<std::string> out;
    for (std::size_t r = 1; r < rows_.size(); ++r) out.push_back(rows_[r]->id);
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t Alignment::matched_column_count() const {
    return static_cast<std::size_t>(
        std::count_if(columns_.begin(), columns_.end(), [](const Column& c) { return c.size() >= 2; }));
}

std::size_t Alignment::unmatched_new_count() const {
    return static_cast<std::size_t>(std::count_if(columns_.begin(), columns_.end(), [](const Column& c) {
        return c.size() == 1 && c.front().row == 0;
    }));
}

std::size_t Alignment::unmatched_content_count() const {
    return static_cast<std::size_t>(std::count_if(columns_.begin(), columns_.end(), [this](const Column& c) {
        return c.size() == 1 && c.front().row != 0 && symbol(c.front()).role == Role::Content;
    }));
}

std::optional<Alignment> Alignment::assemble(std::vector<std::shared_ptr<const Pattern>> rows,
                                             std::vector<Column> columns, const Store& store) {
    const std::size_t nrows = rows.size();
    const std::size_t ncols = columns.size();
    std::vector<std::vector<int>> col_of(nrows);
    for (std::size_t r = 0; r < nrows; ++r) col_of[r].assign(rows[r]->symbols.size(), -1);
    for (std::size_t c = 0; c < ncols; ++c) {
        for (const auto& e : columns[c]) {
            if (e.row >= nrows || e.pos >= col_of[e.row].size() || col_of[e.row][e.pos] != -1)
                throw Error("malformed alignment columns");
            col_of[e.row][e.pos] = static_cast<int>(c);
        }
    }
    for (const auto& v : col_of)
        if (std::find(v.begin(), v.end(), -1) != v.end()) throw Error("alignment leaves a symbol without a column");

    // Row ranks by pattern id so that ordering does not depend on row numbering.
    std::vector<std::string> ids;
    for (std::size_t r = 1; r < nrows; ++r) ids.push_back(rows[r]->id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::vector<int> rank(nrows, -1);
    for (std::size_t r = 1; r < nrows; ++r)
        rank[r] = static_cast<int>(std::lower_bound(ids.begin(), ids.end(), rows[r]->id) - ids.begin());

    std::vector<std::vector<std::pair<int, int>>> prio(ncols);
    std::vector<bool> has_new(ncols, false);
    for (std::size_t c = 0; c < ncols; ++c) {
        for (const auto& e : columns[c]) {
            if (e.row == 0) has_new[c] = true;
            prio[c].emplace_back(rank[e.row], static_cast<int>(e.pos));
        }
        std::sort(prio[c].begin(), prio[c].end());
    }
    auto before = [&](int a, int b) {
        if (has_new[a] != has_new[b]) return static_cast<bool>(has_new[a]);
        if (prio[a] != prio[b]) return prio[a] < prio[b];
        return a < b;
    };

    std::vector<int> indeg(ncols, 0);
    std::vector<std::vector<int>> succ(ncols);
    for (std::size_t r = 0; r < nrows; ++r) {
        for (std::size_t p = 0; p + 1 < col_of[r].size(); ++p) {
            succ[col_of[r][p]].push_back(col_of[r][p + 1]);
            ++indeg[col_of[r][p + 1]];
        }
    }
    std::set<int, decltype(before)> ready(before);
    for (std::size_t c = 0; c < ncols; ++c)
        if (indeg[c] == 0) ready.insert(static_cast<int>(c));
    std::vector<int> order;
    order.reserve(ncols);
    while (!ready.empty()) {
        int c = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(c);
        for (int s : succ[c])
            if (--indeg[s] == 0) ready.insert(s);
    }
    if (order.size() != ncols) return std::nullopt;

    std::vector<int> new_index(ncols);
    for (std::size_t i = 0; i < ncols; ++i) new_index[order[i]] = static_cast<int>(i);

    std::vector<std::size_t> row_order(nrows);
    for (std::size_t r = 0; r < nrows; ++r) row_order[r] = r;
    std::vector<std::vector<int>> row_cols(nrows);
    for (std::size_t r = 0; r < nrows; ++r)
        for (int c : col_of[r]) row_cols[r].push_back(new_index[c]);
    std::stable_sort(row_order.begin() + (nrows ? 1 : 0), row_order.end(), [&](std::size_t a, std::size_t b) {
        if (rank[a] != rank[b]) return rank[a] < rank[b];
        return row_cols[a] < row_cols[b];
    });
    std::vector<std::uint32_t> new_row(nrows);
    for (std::size_t i = 0; i < nrows; ++i) new_row[row_order[i]] = static_cast<std::uint32_t>(i);

    Alignment a;
    a.rows_.resize(nrows);
    for (std::size_t r = 0; r < nrows; ++r) a.rows_[new_row[r]] = std::move(rows[r]);
    a.columns_.resize(ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
        auto& col = a.columns_[new_index[c]];
        col = std::move(columns[c]);
        for (auto& e : col) e.row = new_row[e.row];
        std::sort(col.begin(), col.end());
    }

    std::string key;
    for (std::size_t r = 1; r < nrows; ++r) {
        key += a.rows_[r]->id;
        key += ',';
    }
    key += '#';
    for (const auto& col : a.columns_) {
        for (const auto& e : col) {
            key += std::to_string(e.row);
            key += '.';
            key += std::to_string(e.pos);
            key += ' ';
        }
        key += ';';
    }
    a.key_ = std::move(key);
    a.rescore(store);
    return a;
}

Alignment Alignment::bare(const Pattern& new_pattern, const Store& store) {
    std::vector<Column> cols;
    for (std::size_t i = 0; i < new_pattern.symbols.size(); ++i) cols.push_back({Entry{0, static_cast<std::uint32_t>(i)}});
    auto a = assemble({std::make_shared<const Pattern>(new_pattern)}, std::move(cols), store);
    return *a;
}

void Alignment::rescore(const Store& store) { score_ = score_alignment(store, *this); }

bool ranks_before(const Alignment& a, const Alignment& b) {
    double d = a.score().cd - b.score().cd;
    if (std::abs(d) > kEps) return d > 0;
    if (a.old_row_count() != b.old_row_count()) return a.old_row_count() < b.old_row_count();
    auto ia = a.pattern_ids();
    auto ib = b.pattern_ids();
    if (ia != ib) return ia < ib;
    auto ua = a.unmatched_content_count();
    auto ub = b.unmatched_content_count();
    if (ua != ub) return ua < ub;
    return a.key() < b.key();
}

bool match_symbols(const Symbol& a, const Symbol& b) { return a.name == b.name; }

std::vector<std::string> derive_encoding(const Alignment& a) {
    std::vector<std::string> out;
    for (const auto& col : a.columns()) {
        if (col.size() == 1 && a.symbol(col.front()).role == Role::Id) out.push_back(a.symbol(col.front()).name);
    }
    return out;
}

AlignmentScore score_alignment(const Store& store, const Alignment& a) {
    AlignmentScore s;
    if (a.rows().empty()) return s;
    s.n_o = pattern_size_bits(store, std::span<const Symbol>(a.row(0).symbols));
    if (a.is_fallback()) {
        s.n_e = s.n_o;
    } else {
        auto code = derive_encoding(a);
        s.n_e = pattern_size_bits(store, std::span<const std::string>(code));
        for (const auto& col : a.columns())
            if (col.size() == 1 && col.front().row == 0) s.n_e += symbol_cost(store, a.symbol(col.front()).name);
    }
    s.cd = s.n_o - s.n_e;
    return s;
}

std::vector<std::pair<Alignment, double>> relative_probabilities(const std::vector<Alignment>& ranked) {
    std::vector<std::pair<Alignment, double>> out;
    if (ranked.empty()) return out;
    double lo = ranked.front().score().n_e;
    for (const auto& a : ranked) lo = std::min(lo, a.score().n_e);
    double total = 0;
    std::vector<double> w;
    for (const auto& a : ranked) {
        w.push_back(std::exp2(-(a.score().n_e - lo)));
        total += w.back();
    }
    for (std::size_t i = 0; i < ranked.size(); ++i) out.emplace_back(ranked[i], w[i] / total);
    return out;
}

std::vector<std::string> realize_surface(const Alignment& a, const Store& store) {
    std::vector<std::string> out;
    for (const auto& col : a.columns()) {
        for (const auto& e : col) {
            const auto& s = a.symbol(e);
            if (s.role == Role::Content && store.is_terminal(s.name)) {
                out.push_back(s.name);
                break;
            }
        }
    }
    return out;
}

std::string render_alignment(const Alignment& a) {
    const std::size_t nrows = a.rows().size();
    if (nrows == 0) return {};
    const auto& cols = a.columns();
    std::vector<std::size_t> width(cols.size(), 1);
    std::vector<std::uint32_t> lo(cols.size()), hi(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        lo[c] = cols[c].front().row;
        hi[c] = cols[c].back().row;
        for (const auto& e : cols[c]) width[c] = std::max(width[c], a.symbol(e).name.size());
    }
    const std::size_t label = std::to_string(nrows - 1).size();
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size(), w), ' ');
        return s;
    };
    auto rstrip = [](std::string s) {
        while (!s.empty() && s.back() == ' ') s.pop_back();
        return s;
    };
    std::string out;
    for (std::size_t r = 0; r < nrows; ++r) {
        if (r > 0) {
            std::string link = std::string(label, ' ');
            for (std::size_t c = 0; c < cols.size(); ++c) {
                bool spans = lo[c] < r && hi[c] >= r;
                link += ' ';
                link += pad(spans ? "|" : "", width[c]);
            }
            out += rstrip(link) + '\n';
        }
        std::string line = pad(std::to_string(r), label);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            std::string cell;
            for (const auto& e : cols[c])
                if (e.row == r) cell = a.symbol(e).name;
            if (cell.empty() && lo[c] < r && hi[c] > r) cell = "|";
            line += ' ';
            line += pad(cell, width[c]);
        }
        line += ' ';
        line += std::to_string(r);
        out += line + '\n';
    }
    return out;
}

Store store_covering(const Store& store, const Pattern& new_pattern) {
    std::vector<std::string> missing;
    for (const auto& s : new_pattern.symbols)
        if (!store.knows(s.name)) missing.push_back(s.name);
    if (missing.empty()) return store;
    return store.with_extra_tokens(missing);
}

} // namespace spn
