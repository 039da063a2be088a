#include "spn/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace spn {

namespace {

using nlohmann::json;

std::string number(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s = buf;
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

} // namespace

std::string alignments_jsonl(const std::vector<Alignment>& ranked) {
    std::string out;
    auto probs = relative_probabilities(ranked);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const auto& a = probs[i].first;
        json rows = json::array();
        for (std::size_t r = 0; r < a.rows().size(); ++r) rows.push_back(r == 0 ? std::string("new") : a.row(r).id);
        json cols = json::array();
        for (const auto& c : a.columns()) {
            json col = json::array();
            for (const auto& e : c) col.push_back({e.row, e.pos});
            cols.push_back(col);
        }
        json j;
        j["rank"] = i + 1;
        j["rows"] = rows;
        j["columns"] = cols;
        j["n_o"] = a.score().n_o;
        j["n_e"] = a.score().n_e;
        j["cd"] = a.score().cd;
        j["probability"] = probs[i].second;
        j["encoding"] = derive_encoding(a);
        out += j.dump() + '\n';
    }
    return out;
}

std::string render_report(const std::vector<Alignment>& ranked) {
    std::ostringstream out;
    auto probs = relative_probabilities(ranked);
    out << "rank  rows  N_o  N_e  CD  probability  encoding\n";
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const auto& a = probs[i].first;
        out << i + 1 << "  " << a.old_row_count() << "  " << number(a.score().n_o, 3) << "  "
            << number(a.score().n_e, 3) << "  " << number(a.score().cd, 3) << "  " << number(probs[i].second, 4)
            << "  " << join(derive_encoding(a)) << '\n';
    }
    if (probs.size() == 1 && probs.front().first.score().cd <= 0)
        out << "CD = 0: no compression, the New pattern is left as it is\n";
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const auto& a = probs[i].first;
        out << "\nalignment " << i + 1 << " (CD " << number(a.score().cd, 3) << ")\n";
        out << render_alignment(a);
        out << "encoding: " << join(derive_encoding(a)) << '\n';
    }
    return out.str();
}

std::string learn_trace_jsonl(const LearnResult& result) {
    std::string out;
    for (const auto& e : result.entries) {
        json j;
        j["pass"] = e.pass;
        j["entry"] = e.index;
        j["action"] = std::string(action_name(e.action));
        j["created"] = e.created;
        j["cd"] = e.cd;
        out += j.dump() + '\n';
    }
    for (const auto& p : result.passes) {
        json j;
        j["pass"] = p.pass;
        j["selected"] = p.selection.subset;
        j["g"] = p.selection.g;
        j["e"] = p.selection.e;
        j["total"] = p.selection.total;
        j["raw"] = p.raw_bits;
        j["purged"] = p.purged;
        j["retained_all"] = p.retained_all;
        out += j.dump() + '\n';
    }
    return out;
}

std::string network_dump(const Network& net) {
    std::ostringstream out;
    out << "network array_length " << net.array_length() << " alphabet " << net.receptor_alphabet().size()
        << " neurons " << net.neurons().size() << " assemblies " << net.assemblies().size() << " connections "
        << net.connections().size() << " bundles " << net.bundles().size() << " pool " << net.free_pool().size()
        << '\n';
    out << "alphabet " << join(net.receptor_alphabet()) << '\n';
    out << "data " << join(std::vector<std::string>(net.data_tokens().begin(), net.data_tokens().end())) << '\n';
    for (const auto& [aid, a] : net.assemblies()) {
        out << "assembly " << aid << ' ' << a.pattern.id << " frequency " << a.pattern.frequency << " threshold "
            << number(a.threshold, 4) << " :";
        for (auto n : a.neurons) {
            const auto& neuron = net.neurons()[n];
            out << ' ' << n << '=' << neuron.name << '/' << neuron_kind_name(neuron.kind);
        }
        out << '\n';
    }
    for (const auto& b : net.bundles()) {
        out << "bundle " << b.id << ' ' << (b.kind == BundleKind::Receptor ? "receptor" : "reference");
        if (b.kind == BundleKind::Receptor) out << " offset " << b.offset;
        else out << " source " << *b.source_assembly;
        out << " target " << b.target_assembly << " positions " << b.first << ".." << b.last << '\n';
    }
    for (const auto& c : net.connections()) {
        const auto& from = net.neurons()[c.from];
        out << "connection " << c.from << " -> " << c.to << ' ' << from.name << " bundle " << c.bundle;
        if (from.location) out << " location " << *from.location;
        out << '\n';
    }
    if (!net.free_pool().empty()) {
        out << "pool";
        for (auto n : net.free_pool()) out << ' ' << n;
        out << '\n';
    }
    return out.str();
}

std::string tick_trace_jsonl(const Recognition& recognition) {
    std::string out;
    for (const auto& t : recognition.trace) {
        for (const auto& e : t.assemblies) {
            json j;
            j["tick"] = t.tick;
            j["pattern"] = e.pattern_id;
            j["activation"] = e.activation;
            j["fired"] = e.fired;
            out += j.dump() + '\n';
        }
    }
    return out;
}

} // namespace spn
