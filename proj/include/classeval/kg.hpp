#ifndef CLASSEVAL_KG_HPP
#define CLASSEVAL_KG_HPP

// File-backed knowledge graph.
//
// Triples file, UTF-8, one record per line:
//   src<TAB>relation<TAB>dst            an edge
//   @node<TAB>id<TAB>lemma[<TAB>labels] node metadata, labels comma-separated
// Blank lines and lines starting with '#' are skipped. Nodes named only by
// edges get lemma = id. Lemmas are stored in canonical script.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "classeval/error.hpp"
#include "classeval/sampling.hpp"
#include "classeval/textproc.hpp"

namespace classeval {

class DanglingEdge : public LineError {
public:
    DanglingEdge(std::size_t line, const std::string& node)
        : LineError("dangling edge", line, "node '" + node + "' is not declared") {}
};

struct KgNode {
    std::string id;
    std::string lemma;  // canonical
    std::vector<std::string> labels;
};

struct KgEdge {
    std::size_t src = 0;
    std::string relation;
    std::size_t dst = 0;
};

struct KgLoadOptions {
    Script script = Script::IAST;  // script of ids and lemmas in the file
    bool auto_create_nodes = true;  // false: undeclared endpoints throw DanglingEdge
};

/// Immutable after construction; node and edge indices follow file order.
class KnowledgeGraph {
public:
    std::size_t add_node(std::string id, std::string lemma, std::vector<std::string> labels = {});
    void add_edge(std::size_t src, std::string relation, std::size_t dst);

    const std::vector<KgNode>& nodes() const noexcept { return nodes_; }
    const std::vector<KgEdge>& edges() const noexcept { return edges_; }
    /// Edge indices touching the node either way, in edge order.
    const std::vector<std::size_t>& incident(std::size_t node) const { return incident_.at(node); }

    std::optional<std::size_t> find_id(std::string_view id) const;
    /// First node (in node order) with this canonical lemma.
    std::optional<std::size_t> find_lemma(std::string_view lemma) const;
    /// Index of the first edge carrying the relation; used as its graph order.
    std::optional<std::size_t> relation_rank(std::string_view relation) const;

private:
    std::vector<KgNode> nodes_;
    std::vector<KgEdge> edges_;
    std::vector<std::vector<std::size_t>> incident_;
    std::map<std::string, std::size_t, std::less<>> by_id_;
    std::map<std::string, std::size_t, std::less<>> by_lemma_;
    std::map<std::string, std::size_t, std::less<>> relation_rank_;
};

KnowledgeGraph load_kg(const std::filesystem::path& path, const KgLoadOptions& options = {});
KnowledgeGraph parse_kg(std::string_view content, const KgLoadOptions& options = {});

struct PathTriple {
    std::string src_lemma;
    std::string relation;
    std::string dst_lemma;
    std::size_t depth = 0;

    bool operator==(const PathTriple&) const = default;
};

/// Distinct relation names incident to the entities, in order of first
/// encounter; more than `limit` are reduced to a seeded sample (order kept).
std::vector<std::string> fetch_relations(const KnowledgeGraph& kg, const std::vector<std::size_t>& entities,
                                         std::size_t limit, Rng& rng);

struct FetchedEntities {
    std::vector<std::size_t> entities;
    std::vector<PathTriple> paths;  // paths[i] reaches entities[i]
};

/// Unvisited neighbours reached through the listed relations, either
/// direction, each with the first edge that reached it (oriented as stored).
/// More than `limit` are reduced to a seeded sample (order kept).
FetchedEntities fetch_entities(const KnowledgeGraph& kg, const std::vector<std::size_t>& entities,
                               const std::vector<std::string>& relations, const std::vector<bool>& visited,
                               std::size_t depth, std::size_t limit, Rng& rng);

}  // namespace classeval

#endif  // CLASSEVAL_KG_HPP
