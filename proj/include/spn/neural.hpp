#pragma once

#include "spn/store.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace spn {

enum class NeuronKind { Receptor, Content, Identification };

std::string_view neuron_kind_name(NeuronKind kind);

struct Neuron {
    std::uint32_t id = 0;
    std::string name;
    NeuronKind kind = NeuronKind::Receptor;
    /// Owning assembly; empty for receptors and for neurons in the free pool.
    std::optional<std::uint32_t> assembly;
    /// Array location, receptors only.
    std::optional<std::uint32_t> location;
};

struct PatternAssembly {
    std::uint32_t id = 0;
    Pattern pattern;
    /// Same order as the pattern's symbols.
    std::vector<std::uint32_t> neurons;
    double threshold = 0.7;
};

enum class BundleKind { Receptor, Reference };

/// Connections from one contiguous source run into one contiguous run of
/// C-neurons of a target assembly. Receptor bundles share a fixed offset
/// between array location and target position.
struct Bundle {
    std::uint32_t id = 0;
    BundleKind kind = BundleKind::Receptor;
    std::optional<std::uint32_t> source_assembly;
    std::int64_t offset = 0;
    std::uint32_t target_assembly = 0;
    std::uint32_t first = 0;
    std::uint32_t last = 0;
};

struct Connection {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    std::uint32_t bundle = 0;
};

struct NeuralParams {
    double theta = 0.7;
    double kappa = 0.5;
    double lambda = 0.1;
    std::size_t max_ticks = 32;
};

struct NeuralDiagnostic {
    std::string code;
    std::string message;
};

class Network {
public:
    Network() = default;

    std::size_t array_length() const { return array_length_; }
    const std::vector<std::string>& receptor_alphabet() const { return alphabet_; }
    const std::vector<Neuron>& neurons() const { return neurons_; }
    const std::map<std::uint32_t, PatternAssembly>& assemblies() const { return assemblies_; }
    const std::vector<Connection>& connections() const { return connections_; }
    const std::vector<Bundle>& bundles() const { return bundles_; }
    const std::vector<std::uint32_t>& free_pool() const { return pool_; }
    const NeuralParams& params() const { return params_; }

    /// Receptor neuron for `token` at `location`, if the token is known.
    std::optional<std::uint32_t> receptor(std::size_t location, std::string_view token) const;
    const PatternAssembly* find_assembly(std::string_view pattern_id) const;

    /// Token names that the array senses directly rather than through
    /// references (tokens never used as ID-symbols when compiled).
    const std::set<std::string, std::less<>>& data_tokens() const { return data_tokens_; }

    std::uint32_t add_assembly(const Pattern& pattern);
    void remove_assembly(std::uint32_t id);

    /// Hand-editing hooks used to build deliberately broken networks.
    std::vector<Neuron>& mutable_neurons() { return neurons_; }
    std::vector<Connection>& mutable_connections() { return connections_; }
    std::map<std::uint32_t, PatternAssembly>& mutable_assemblies() { return assemblies_; }

    friend Network compile_network(const Store& store, std::size_t array_length, const NeuralParams& params);

private:
    std::uint32_t allocate(const std::string& name, NeuronKind kind, std::uint32_t assembly);
    void wire(std::uint32_t assembly);
    void rebuild_bundles();

    std::size_t array_length_ = 0;
    std::vector<std::string> alphabet_;
    std::map<std::string, std::size_t, std::less<>> alphabet_index_;
    std::set<std::string, std::less<>> data_tokens_;
    std::vector<Neuron> neurons_;
    std::vector<std::vector<std::uint32_t>> receptors_;
    std::map<std::uint32_t, PatternAssembly> assemblies_;
    std::uint32_t next_assembly_ = 0;
    std::vector<Connection> connections_;
    std::vector<Bundle> bundles_;
    std::vector<std::uint32_t> pool_;
    NeuralParams params_;
};

Network compile_network(const Store& store, std::size_t array_length, const NeuralParams& params = {});
Network create_assembly(Network network, const Pattern& pattern);
Network purge_assembly(Network network, std::uint32_t assembly_id);

std::vector<NeuralDiagnostic> check_structural_invariants(const Network& network);

/// What a C-neuron is currently listening to.
struct Source {
    enum class Kind { None, Receptor, Reference } kind = Kind::None;
    /// Array location for receptors, source assembly for references.
    std::uint32_t where = 0;
    /// Position of the ID-neuron inside the source assembly.
    std::uint32_t position = 0;

    friend bool operator==(const Source&, const Source&) = default;
};

struct AssemblyState {
    double activation = 0;
    bool fired = false;
    std::size_t fired_at = 0;
    /// One entry per C-neuron of the assembly, in order.
    std::vector<Source> binding;
    /// Span of array locations covered, when any.
    std::optional<std::pair<std::uint32_t, std::uint32_t>> span;
};

struct NetworkState {
    std::size_t tick = 0;
    std::vector<std::string> input;
    std::vector<std::uint32_t> active_receptors;
    std::map<std::uint32_t, AssemblyState> assemblies;
    std::size_t ignitions_last_tick = 0;
};

NetworkState present_input(const Network& network, const std::vector<std::string>& tokens);
NetworkState step(const Network& network, const NetworkState& state);

struct TickEntry {
    std::string pattern_id;
    double activation = 0;
    bool fired = false;
};

struct TickRecord {
    std::size_t tick = 0;
    std::vector<TickEntry> assemblies;
};

struct Recognition {
    /// Pattern ids of fired assemblies, sorted.
    std::vector<std::string> fired;
    std::vector<TickRecord> trace;
    NetworkState final_state;
};

Recognition recognize(const Network& network, const std::vector<std::string>& tokens, std::size_t max_ticks = 32);

} // namespace spn
