#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bpnet/errors.hpp"

namespace bpnet {

// Row-sum (probabilistic) / row-max (possibilistic) tolerance accepted on
// input before renormalization.
inline constexpr double kCptTolerance = 1e-9;

enum class Mode { probabilistic, possibilistic };

struct Node {
  std::string id;
  std::vector<std::string> states;  // declared order fixes CPT indexing
};

// Conditional table of one node given its parents. Rows are indexed by the
// mixed-radix encoding of the parent states in declared parent order, with
// the last parent least significant. A root node holds a single row: its
// prior.
struct Cpt {
  std::string child;
  std::vector<std::string> parents;
  std::vector<std::vector<double>> rows;
};

struct Evidence {
  std::map<std::string, std::string> observations;  // node id -> state label

  bool empty() const { return observations.empty(); }
};

// Posterior (or prior) values over one node's states, in state order.
// Probabilistic results sum to 1; possibilistic results have max 1.
struct Distribution {
  std::string node;
  std::vector<double> values;
};

enum class Severity { error, warning };

struct Issue {
  Severity severity;
  std::string location;  // node id, "edge A->B", "cpt B row 3", ...
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Issue> issues;

  void add_error(std::string location, std::string message) {
    ok = false;
    issues.push_back({Severity::error, std::move(location), std::move(message)});
  }
  void add_warning(std::string location, std::string message) {
    issues.push_back({Severity::warning, std::move(location), std::move(message)});
  }
};

// A discrete network: nodes in declaration order, one table per node. The
// directed edges are exactly the CPT parent lists, so "parent list equals
// in-edges" holds by construction. Instances are plain data; nothing here
// checks acyclicity or row normalization -- that is validate_network's job,
// and it accepts broken input on purpose.
//
// Immutable once built (engines take const references and never copy-mutate).
class Network {
 public:
  // Throws std::invalid_argument only for states the representation cannot
  // hold: a duplicate node id. Everything else is left for validation.
  std::size_t add_node(std::string id, std::vector<std::string> states);

  // Table for a declared node; parents may name anything (validation will
  // flag unknown ids). A prior is a parentless table with one row.
  void set_cpt(std::string_view child, std::vector<std::string> parents,
               std::vector<std::vector<double>> rows);
  void set_prior(std::string_view node, std::vector<double> row);

  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t cardinality(std::size_t i) const { return nodes_[i].states.size(); }

  std::optional<std::size_t> find(std::string_view id) const;
  // Throws std::invalid_argument when the id is unknown.
  std::size_t index_of(std::string_view id) const;
  std::optional<std::size_t> state_index(std::size_t node, std::string_view state) const;

  bool has_cpt(std::size_t i) const { return cpts_[i].has_value(); }
  const Cpt& cpt(std::size_t i) const;
  Cpt& mutable_cpt(std::size_t i);

  // Directed edges (parent, child) as node indices, in child declaration
  // order and, per child, declared parent order. Unknown parent names are
  // skipped (they cannot be represented as an index).
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::optional<Cpt>> cpts_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Checks every structural and numeric invariant for the given mode and
// reports each violation; never throws on bad input.
ValidationReport validate_network(const Network& net, Mode mode);

// True iff the undirected skeleton is acyclic, i.e. the edge count equals
// node count minus the number of weakly connected components.
bool is_polytree(const Network& net);

// Parents-before-children order, deterministic with declaration-order
// tie-breaks. Throws StructuralError when the graph has a directed cycle.
std::vector<std::string> topological_order(const Network& net);

// One-time cleanup after a network passed validation: divides each row by
// its sum (probabilistic) or max (possibilistic) so rounded text input
// becomes exactly normalized.
void normalize_rows(Network& net, Mode mode);

// Skeleton diameter: the longest shortest undirected path within any weakly
// connected component. 0 for a single node.
std::size_t skeleton_diameter(const Network& net);

// --- mixed-radix helpers -------------------------------------------------
//
// Shared indexing convention: digit i ranges over cards[i], the LAST digit
// is least significant. CPT rows, enumeration order and message sums all
// use this encoding.

std::size_t radix_count(std::span<const std::size_t> cards);
std::size_t radix_index(std::span<const std::size_t> digits,
                        std::span<const std::size_t> cards);
void radix_decode(std::size_t index, std::span<const std::size_t> cards,
                  std::span<std::size_t> digits);
// Advance to the next assignment; false when the odometer wraps to zero.
bool radix_next(std::span<std::size_t> digits, std::span<const std::size_t> cards);

// --- derived graph views --------------------------------------------------

// Index-based adjacency derived from a network whose node references all
// resolve. Edge k is (parent_of[k], child_of[k]); in_edges[c] lists the
// edges into c in declared parent order, so in_edges[c][j] carries parent j
// of c's CPT.
struct Adjacency {
  std::vector<std::pair<std::size_t, std::size_t>> edge_list;
  std::vector<std::vector<std::size_t>> in_edges;   // per node, edge ids
  std::vector<std::vector<std::size_t>> out_edges;  // per node, edge ids
  std::vector<std::vector<std::size_t>> parents;    // per node, node ids
  std::vector<std::vector<std::size_t>> children;   // per node, node ids

  std::size_t edge_count() const { return edge_list.size(); }
};

// Throws std::invalid_argument when a CPT references an unknown node; call
// on validated networks.
Adjacency make_adjacency(const Network& net);

// Observed state index per node (nullopt for unobserved). Throws
// std::invalid_argument on unknown node or state.
std::vector<std::optional<std::size_t>> resolve_evidence(const Network& net,
                                                         const Evidence& ev);

// Parent cardinalities of node i in declared parent order.
std::vector<std::size_t> parent_cards(const Network& net, std::size_t i);

// Joint state-space size with saturation: returns true iff the product of
// all cardinalities is <= limit, without overflowing.
bool joint_size_within(const Network& net, std::size_t limit);

}  // namespace bpnet
