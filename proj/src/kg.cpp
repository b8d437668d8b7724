#include "classeval/kg.hpp"

#include <algorithm>
#include <set>

#include "classeval/digest.hpp"

namespace classeval {

std::size_t KnowledgeGraph::add_node(std::string id, std::string lemma, std::vector<std::string> labels) {
    if (id.empty()) throw std::invalid_argument("node id is empty");
    if (by_id_.count(id)) throw std::invalid_argument("duplicate node id '" + id + "'");
    const std::size_t index = nodes_.size();
    by_id_.emplace(id, index);
    by_lemma_.try_emplace(lemma, index);
    nodes_.push_back(KgNode{std::move(id), std::move(lemma), std::move(labels)});
    incident_.emplace_back();
    return index;
}

void KnowledgeGraph::add_edge(std::size_t src, std::string relation, std::size_t dst) {
    if (src >= nodes_.size() || dst >= nodes_.size()) throw std::out_of_range("edge endpoint out of range");
    if (relation.empty()) throw std::invalid_argument("relation name is empty");
    const std::size_t index = edges_.size();
    relation_rank_.try_emplace(relation, index);
    edges_.push_back(KgEdge{src, std::move(relation), dst});
    incident_[src].push_back(index);
    if (dst != src) incident_[dst].push_back(index);
}

std::optional<std::size_t> KnowledgeGraph::find_id(std::string_view id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> KnowledgeGraph::find_lemma(std::string_view lemma) const {
    const auto it = by_lemma_.find(lemma);
    if (it == by_lemma_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> KnowledgeGraph::relation_rank(std::string_view relation) const {
    const auto it = relation_rank_.find(relation);
    if (it == relation_rank_.end()) return std::nullopt;
    return it->second;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto tab = line.find('\t', start);
        out.push_back(normalize(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start)));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

}  // namespace

KnowledgeGraph parse_kg(std::string_view content, const KgLoadOptions& options) {
    // Node declarations may follow the edges that use them, so collect first.
    struct Declared {
        std::string lemma;
        std::vector<std::string> labels;
        std::size_t line;
    };
    std::map<std::string, Declared> declared;
    std::vector<std::string> node_order;
    struct RawEdge {
        std::string src, relation, dst;
        std::size_t line;
    };
    std::vector<RawEdge> raw_edges;

    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start < content.size()) {
        const auto nl = content.find('\n', start);
        std::string line(content.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        start = nl == std::string_view::npos ? content.size() : nl + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;

        const auto fields = split_tabs(line);
        if (fields[0] == "@node") {
            if (fields.size() < 3 || fields.size() > 4) throw ParseError(lineno, "@node needs id, lemma and optional labels");
            if (fields[1].empty() || fields[2].empty()) throw ParseError(lineno, "@node with empty id or lemma");
            Declared d{fields[2], {}, lineno};
            if (fields.size() == 4) {
                std::size_t s = 0;
                const std::string& labels = fields[3];
                while (s <= labels.size()) {
                    const auto comma = labels.find(',', s);
                    std::string label = normalize(labels.substr(s, comma == std::string::npos ? std::string::npos : comma - s));
                    if (!label.empty()) d.labels.push_back(std::move(label));
                    if (comma == std::string::npos) break;
                    s = comma + 1;
                }
            }
            const std::string id = nfc(fields[1]);
            if (!declared.emplace(id, std::move(d)).second) throw ParseError(lineno, "node '" + id + "' declared twice");
            node_order.push_back(id);
            continue;
        }
        if (fields.size() != 3) throw ParseError(lineno, "expected src<TAB>relation<TAB>dst");
        for (const auto& f : fields)
            if (f.empty()) throw ParseError(lineno, "empty field in triple");
        raw_edges.push_back({fields[0], fields[1], fields[2], lineno});
    }

    // Nodes are numbered in order of first mention, declaration or edge.
    std::map<std::string, std::size_t> first_mention;
    std::vector<std::pair<std::size_t, std::string>> mentions;
    const auto mention = [&](const std::string& id, std::size_t line) {
        if (first_mention.emplace(id, line).second) mentions.emplace_back(line, id);
    };
    for (const auto& id : node_order) mention(id, declared.at(id).line);
    for (const auto& e : raw_edges) {
        for (const std::string* id : {&e.src, &e.dst}) {
            if (!declared.count(*id) && !options.auto_create_nodes) throw DanglingEdge(e.line, *id);
            mention(*id, e.line);
        }
    }
    std::stable_sort(mentions.begin(), mentions.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    KnowledgeGraph kg;
    for (const auto& [line, id] : mentions) {
        const auto it = declared.find(id);
        if (it != declared.end())
            kg.add_node(id, to_canonical(it->second.lemma, options.script), it->second.labels);
        else
            kg.add_node(id, to_canonical(id, options.script));
    }
    for (const auto& e : raw_edges) kg.add_edge(*kg.find_id(e.src), e.relation, *kg.find_id(e.dst));
    return kg;
}

KnowledgeGraph load_kg(const std::filesystem::path& path, const KgLoadOptions& options) {
    return parse_kg(read_file(path.string()), options);
}

std::vector<std::string> fetch_relations(const KnowledgeGraph& kg, const std::vector<std::size_t>& entities,
                                         std::size_t limit, Rng& rng) {
    std::vector<std::string> found;
    std::set<std::string_view> seen;
    for (std::size_t node : entities)
        for (std::size_t e : kg.incident(node)) {
            const std::string& rel = kg.edges()[e].relation;
            if (seen.insert(rel).second) found.push_back(rel);
        }
    if (found.size() <= limit) return found;
    std::vector<std::string> sampled;
    for (std::size_t i : sample_indices(rng, found.size(), limit)) sampled.push_back(found[i]);
    return sampled;
}

FetchedEntities fetch_entities(const KnowledgeGraph& kg, const std::vector<std::size_t>& entities,
                               const std::vector<std::string>& relations, const std::vector<bool>& visited,
                               std::size_t depth, std::size_t limit, Rng& rng) {
    FetchedEntities all;
    const std::set<std::string_view> wanted(relations.begin(), relations.end());
    std::set<std::size_t> reached(entities.begin(), entities.end());
    for (std::size_t node : entities) {
        for (std::size_t e : kg.incident(node)) {
            const KgEdge& edge = kg.edges()[e];
            if (!wanted.count(edge.relation)) continue;
            const std::size_t other = edge.src == node ? edge.dst : edge.src;
            if (other < visited.size() && visited[other]) continue;
            if (!reached.insert(other).second) continue;
            all.entities.push_back(other);
            all.paths.push_back({kg.nodes()[edge.src].lemma, edge.relation, kg.nodes()[edge.dst].lemma, depth});
        }
    }
    if (all.entities.size() <= limit) return all;
    FetchedEntities sampled;
    for (std::size_t i : sample_indices(rng, all.entities.size(), limit)) {
        sampled.entities.push_back(all.entities[i]);
        sampled.paths.push_back(all.paths[i]);
    }
    return sampled;
}

}  // namespace classeval
