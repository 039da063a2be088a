#include "spn/neural.hpp"

#include <algorithm>
#include <tuple>

namespace spn {

std::string_view neuron_kind_name(NeuronKind kind) {
    switch (kind) {
    case NeuronKind::Receptor: return "receptor";
    case NeuronKind::Content: return "C";
    case NeuronKind::Identification: return "ID";
    }
    return "?";
}

std::optional<std::uint32_t> Network::receptor(std::size_t location, std::string_view token) const {
    auto it = alphabet_index_.find(token);
    if (it == alphabet_index_.end() || location >= receptors_.size()) return std::nullopt;
    return receptors_[location][it->second];
}

const PatternAssembly* Network::find_assembly(std::string_view pattern_id) const {
    for (const auto& [id, a] : assemblies_)
        if (a.pattern.id == pattern_id) return &a;
    return nullptr;
}

std::uint32_t Network::allocate(const std::string& name, NeuronKind kind, std::uint32_t assembly) {
    std::uint32_t id;
    if (!pool_.empty()) {
        id = pool_.back();
        pool_.pop_back();
    } else {
        id = static_cast<std::uint32_t>(neurons_.size());
        neurons_.emplace_back();
        neurons_.back().id = id;
    }
    auto& n = neurons_[id];
    n.name = name;
    n.kind = kind;
    n.assembly = assembly;
    n.location.reset();
    return id;
}

std::uint32_t Network::add_assembly(const Pattern& pattern) {
    if (pattern.symbols.empty()) throw Error("cannot create an assembly for an empty pattern");
    if (pattern.id_symbol_count() == 0) throw Error("pattern '" + pattern.id + "' has no ID-symbols");
    PatternAssembly a;
    a.id = next_assembly_++;
    a.pattern = pattern;
    a.threshold = params_.theta;
    for (const auto& s : pattern.symbols)
        a.neurons.push_back(allocate(s.name, s.role == Role::Id ? NeuronKind::Identification : NeuronKind::Content, a.id));
    const auto id = a.id;
    assemblies_.emplace(id, std::move(a));
    wire(id);
    rebuild_bundles();
    return id;
}

void Network::wire(std::uint32_t aid) {
    const auto& a = assemblies_.at(aid);
    for (std::size_t k = 0; k < a.neurons.size(); ++k) {
        const auto& n = neurons_[a.neurons[k]];
        if (n.kind == NeuronKind::Content) {
            if (auto it = alphabet_index_.find(n.name); it != alphabet_index_.end())
                for (const auto& loc : receptors_) connections_.push_back({loc[it->second], n.id, 0});
            for (const auto& [bid, b] : assemblies_)
                for (auto src : b.neurons)
                    if (neurons_[src].kind == NeuronKind::Identification && neurons_[src].name == n.name)
                        connections_.push_back({src, n.id, 0});
        } else {
            for (const auto& [bid, b] : assemblies_) {
                if (bid == aid) continue;
                for (auto dst : b.neurons)
                    if (neurons_[dst].kind == NeuronKind::Content && neurons_[dst].name == n.name)
                        connections_.push_back({n.id, dst, 0});
            }
        }
    }
}

void Network::remove_assembly(std::uint32_t aid) {
    auto it = assemblies_.find(aid);
    if (it == assemblies_.end()) throw Error("unknown assembly " + std::to_string(aid));
    std::set<std::uint32_t> members(it->second.neurons.begin(), it->second.neurons.end());
    std::erase_if(connections_, [&](const Connection& c) { return members.contains(c.from) || members.contains(c.to); });
    for (auto n : it->second.neurons) {
        neurons_[n].assembly.reset();
        neurons_[n].name.clear();
        pool_.push_back(n);
    }
    assemblies_.erase(it);
    rebuild_bundles();
}

void Network::rebuild_bundles() {
    bundles_.clear();
    // neuron -> (assembly, position)
    std::vector<std::pair<std::int64_t, std::uint32_t>> where(neurons_.size(), {-1, 0});
    for (const auto& [aid, a] : assemblies_)
        for (std::uint32_t k = 0; k < a.neurons.size(); ++k) where[a.neurons[k]] = {aid, k};

    // Per target C-neuron: the set of source assemblies feeding it, and whether receptors do.
    std::map<std::uint32_t, std::map<std::uint32_t, std::set<std::uint32_t>>> fed_by; // target asm -> pos -> sources
    std::map<std::uint32_t, std::set<std::uint32_t>> sensed;                            // target asm -> positions
    for (const auto& c : connections_) {
        auto [ta, tp] = where[c.to];
        if (ta < 0) continue;
        const auto& from = neurons_[c.from];
        if (from.kind == NeuronKind::Receptor) sensed[static_cast<std::uint32_t>(ta)].insert(tp);
        else if (where[c.from].first >= 0)
            fed_by[static_cast<std::uint32_t>(ta)][tp].insert(static_cast<std::uint32_t>(where[c.from].first));
    }
    // Start of the maximal run containing `pos` among `positions`.
    auto run_start = [](const std::set<std::uint32_t>& positions, std::uint32_t pos) {
        while (pos > 0 && positions.contains(pos - 1)) --pos;
        return pos;
    };
    auto run_end = [](const std::set<std::uint32_t>& positions, std::uint32_t pos) {
        while (positions.contains(pos + 1)) ++pos;
        return pos;
    };
    using Key = std::tuple<std::uint32_t, int, std::int64_t, std::int64_t, std::uint32_t>;
    std::map<Key, std::uint32_t> ids;
    std::vector<Key> keys(connections_.size());
    for (std::size_t i = 0; i < connections_.size(); ++i) {
        const auto& c = connections_[i];
        auto [ta, tp] = where[c.to];
        if (ta < 0) continue;
        const auto t = static_cast<std::uint32_t>(ta);
        const auto& from = neurons_[c.from];
        if (from.kind == NeuronKind::Receptor) {
            auto start = run_start(sensed[t], tp);
            keys[i] = {t, 0, static_cast<std::int64_t>(*from.location) - tp, -1, start};
        } else {
            auto src = static_cast<std::uint32_t>(where[c.from].first);
            std::set<std::uint32_t> positions;
            for (const auto& [pos, srcs] : fed_by[t])
                if (srcs.contains(src)) positions.insert(pos);
            keys[i] = {t, 1, 0, src, run_start(positions, tp)};
        }
        ids.emplace(keys[i], 0);
    }
    std::uint32_t next = 0;
    for (auto& [key, id] : ids) {
        id = next++;
        Bundle b;
        b.id = id;
        b.target_assembly = std::get<0>(key);
        b.kind = std::get<1>(key) == 0 ? BundleKind::Receptor : BundleKind::Reference;
        b.offset = std::get<2>(key);
        if (b.kind == BundleKind::Reference) b.source_assembly = static_cast<std::uint32_t>(std::get<3>(key));
        b.first = std::get<4>(key);
        if (b.kind == BundleKind::Receptor) {
            b.last = run_end(sensed[b.target_assembly], b.first);
        } else {
            std::set<std::uint32_t> positions;
            for (const auto& [pos, srcs] : fed_by[b.target_assembly])
                if (srcs.contains(*b.source_assembly)) positions.insert(pos);
            b.last = run_end(positions, b.first);
        }
        bundles_.push_back(b);
    }
    for (std::size_t i = 0; i < connections_.size(); ++i)
        if (where[connections_[i].to].first >= 0) connections_[i].bundle = ids[keys[i]];
}

Network compile_network(const Store& store, std::size_t array_length, const NeuralParams& params) {
    auto diags = validate_store(store);
    if (!diags.empty()) throw Error("cannot compile an invalid store: " + diags.front().message);
    if (params.theta <= 0 || params.theta > 1) throw Error("threshold must lie in (0, 1]");
    if (params.kappa < 0 || params.lambda < 0) throw Error("kappa and lambda must be non-negative");
    Network net;
    net.params_ = params;
    net.array_length_ = array_length;
    net.alphabet_.assign(store.alphabet().begin(), store.alphabet().end());
    for (std::size_t i = 0; i < net.alphabet_.size(); ++i) net.alphabet_index_.emplace(net.alphabet_[i], i);
    for (const auto& t : net.alphabet_)
        if (store.is_terminal(t)) net.data_tokens_.insert(t);
    net.receptors_.resize(array_length);
    for (std::size_t loc = 0; loc < array_length; ++loc) {
        for (const auto& t : net.alphabet_) {
            Neuron n;
            n.id = static_cast<std::uint32_t>(net.neurons_.size());
            n.name = t;
            n.kind = NeuronKind::Receptor;
            n.location = static_cast<std::uint32_t>(loc);
            net.receptors_[loc].push_back(n.id);
            net.neurons_.push_back(std::move(n));
        }
    }
    for (const auto& p : store.patterns()) {
        PatternAssembly a;
        a.id = net.next_assembly_++;
        a.pattern = p;
        a.threshold = params.theta;
        for (const auto& s : p.symbols)
            a.neurons.push_back(
                net.allocate(s.name, s.role == Role::Id ? NeuronKind::Identification : NeuronKind::Content, a.id));
        net.assemblies_.emplace(a.id, std::move(a));
    }
    // Wire after all assemblies exist so that each connection is added once.
    for (const auto& [aid, a] : net.assemblies_) {
        for (auto nid : a.neurons) {
            const auto& n = net.neurons_[nid];
            if (n.kind != NeuronKind::Content) continue;
            if (auto it = net.alphabet_index_.find(n.name); it != net.alphabet_index_.end())
                for (const auto& loc : net.receptors_) net.connections_.push_back({loc[it->second], nid, 0});
            for (const auto& [bid, b] : net.assemblies_)
                for (auto src : b.neurons)
                    if (net.neurons_[src].kind == NeuronKind::Identification && net.neurons_[src].name == n.name)
                        net.connections_.push_back({src, nid, 0});
        }
    }
    net.rebuild_bundles();
    return net;
}

Network create_assembly(Network network, const Pattern& pattern) {
    network.add_assembly(pattern);
    return network;
}

Network purge_assembly(Network network, std::uint32_t assembly_id) {
    network.remove_assembly(assembly_id);
    return network;
}

std::vector<NeuralDiagnostic> check_structural_invariants(const Network& net) {
    std::vector<NeuralDiagnostic> out;
    const auto& neurons = net.neurons();
    std::vector<int> memberships(neurons.size(), 0);
    std::vector<bool> pooled(neurons.size(), false);
    for (auto n : net.free_pool()) {
        if (n >= neurons.size()) {
            out.push_back({"bad pool entry", "pool holds unknown neuron " + std::to_string(n)});
            continue;
        }
        if (pooled[n]) out.push_back({"pool duplicate", "neuron " + std::to_string(n) + " is pooled twice"});
        pooled[n] = true;
        ++memberships[n];
    }
    for (const auto& [aid, a] : net.assemblies()) {
        if (a.neurons.size() != a.pattern.symbols.size())
            out.push_back({"order mismatch", "assembly " + std::to_string(aid) + " does not mirror its pattern"});
        for (std::size_t k = 0; k < a.neurons.size(); ++k) {
            auto nid = a.neurons[k];
            if (nid >= neurons.size()) {
                out.push_back({"unknown neuron", "assembly " + std::to_string(aid) + " lists unknown neuron"});
                continue;
            }
            ++memberships[nid];
            const auto& n = neurons[nid];
            if (!n.assembly || *n.assembly != aid)
                out.push_back({"assembly mismatch", "neuron " + std::to_string(nid) + " does not point back to assembly " +
                                                        std::to_string(aid)});
            if (k < a.pattern.symbols.size()) {
                const auto& s = a.pattern.symbols[k];
                auto want = s.role == Role::Id ? NeuronKind::Identification : NeuronKind::Content;
                if (n.name != s.name || n.kind != want)
                    out.push_back({"kind mismatch", "neuron " + std::to_string(nid) + " does not match symbol '" + s.name + "'"});
            }
        }
    }
    for (const auto& n : neurons) {
        if (n.kind == NeuronKind::Receptor) {
            if (memberships[n.id] != 0)
                out.push_back({"receptor in assembly", "receptor " + std::to_string(n.id) + " is assigned to an assembly"});
            continue;
        }
        if (memberships[n.id] == 0)
            out.push_back({"orphan neuron", "neuron " + std::to_string(n.id) + " is in no assembly and not pooled"});
        else if (memberships[n.id] > 1)
            out.push_back({"multiple assemblies", "neuron " + std::to_string(n.id) + " belongs to more than one assembly"});
    }

    std::vector<bool> has_reference_input(neurons.size(), false);
    for (const auto& c : net.connections()) {
        if (c.from >= neurons.size() || c.to >= neurons.size()) {
            out.push_back({"dangling connection", "connection to an unknown neuron"});
            continue;
        }
        const auto& a = neurons[c.from];
        const auto& b = neurons[c.to];
        if (pooled[c.from] || pooled[c.to]) out.push_back({"dangling connection", "connection touches a pooled neuron"});
        if (a.name != b.name)
            out.push_back({"name mismatch", "connection joins '" + a.name + "' to '" + b.name + "'"});
        if (a.kind == NeuronKind::Content || b.kind != NeuronKind::Content)
            out.push_back({"direction", "connection " + std::to_string(c.from) + "->" + std::to_string(c.to) +
                                            " does not run from a receptor or ID-neuron to a C-neuron"});
        if (a.kind == NeuronKind::Identification) has_reference_input[c.to] = true;
    }

    for (std::size_t loc = 0; loc < net.array_length(); ++loc) {
        for (const auto& t : net.receptor_alphabet()) {
            auto r = net.receptor(loc, t);
            if (!r || neurons[*r].name != t || neurons[*r].location != loc)
                out.push_back({"missing receptor", "no receptor for '" + t + "' at location " + std::to_string(loc)});
        }
    }

    for (const auto& [aid, a] : net.assemblies()) {
        for (auto nid : a.neurons) {
            if (nid >= neurons.size()) continue;
            const auto& n = neurons[nid];
            if (n.kind == NeuronKind::Content && !net.data_tokens().contains(n.name) && !has_reference_input[nid])
                out.push_back({"dangling reference", "C-neuron '" + n.name + "' of '" + a.pattern.id +
                                                         "' receives no reference"});
        }
    }
    return out;
}

} // namespace spn
