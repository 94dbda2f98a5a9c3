#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "treetangent/errors.hpp"
#include "treetangent/kernel.hpp"

namespace treetangent {

enum class TreeKind { tree, rule_set };

enum class Slot { left, right };

// Parent-array encoding. parent == 0 marks the root; ids are dense from 1,
// with separate id spaces for internal nodes and leaves.
struct TopoEntry {
    int id = 0;
    int parent = 0;
    Slot slot = Slot::left;
};

// Explicit rooted binary tree driving the simulator. kind == tree means every
// internal node has exactly a left and a right child (so leaf-reach
// probabilities sum to 1); kind == rule_set is a single left-only chain with
// one leaf, the degenerate "rule" architecture.
class TreeTopology {
public:
    struct PathStep {
        int node;   // 0-based internal-node index
        bool left;  // which slot the path takes at that node
    };

    TreeTopology(TreeKind kind, std::vector<TopoEntry> nodes, std::vector<TopoEntry> leaves)
        : kind_(kind), nodes_(std::move(nodes)), leaves_(std::move(leaves)) {
        validate_and_index();
    }

    TreeKind kind() const noexcept { return kind_; }
    int n_nodes() const noexcept { return static_cast<int>(nodes_.size()); }
    int n_leaves() const noexcept { return static_cast<int>(leaves_.size()); }
    const std::vector<TopoEntry>& nodes() const noexcept { return nodes_; }
    const std::vector<TopoEntry>& leaves() const noexcept { return leaves_; }

    // Root-to-parent path of a 0-based leaf index.
    const std::vector<PathStep>& leaf_path(int leaf) const { return leaf_paths_.at(leaf); }
    int leaf_depth(int leaf) const { return static_cast<int>(leaf_paths_.at(leaf).size()); }
    int max_depth() const {
        int d = 0;
        for (const auto& p : leaf_paths_) d = std::max<int>(d, static_cast<int>(p.size()));
        return d;
    }

    // Left/right children swapped everywhere. Only meaningful for soft trees;
    // a mirrored rule chain would stop being a rule chain.
    TreeTopology mirrored() const {
        if (kind_ != TreeKind::tree)
            throw std::invalid_argument("TreeTopology::mirrored: only tree kind can be mirrored");
        auto flip = [](Slot s) { return s == Slot::left ? Slot::right : Slot::left; };
        auto nodes = nodes_;
        for (auto& e : nodes)
            if (e.parent != 0) e.slot = flip(e.slot);
        auto leaves = leaves_;
        for (auto& e : leaves) e.slot = flip(e.slot);
        return TreeTopology(kind_, std::move(nodes), std::move(leaves));
    }

    static TreeTopology perfect_binary(int depth) {
        require_depth(depth);
        if (depth > 20) throw std::invalid_argument("perfect_binary: depth too large to materialize");
        std::vector<TopoEntry> nodes, leaves;
        const int n_internal = (1 << depth) - 1;
        // Heap order: children of heap position p are 2p (left) and 2p+1 (right).
        for (int p = 1; p <= n_internal; ++p)
            nodes.push_back({p, p / 2, p % 2 == 0 ? Slot::left : Slot::right});
        for (int j = 0; j < (1 << depth); ++j) {
            const int pos = (1 << depth) + j;
            leaves.push_back({j + 1, pos / 2, pos % 2 == 0 ? Slot::left : Slot::right});
        }
        return TreeTopology(TreeKind::tree, std::move(nodes), std::move(leaves));
    }

    // Chain of internal nodes growing left; one leaf hangs right of each node
    // except the deepest, which carries both final leaves.
    static TreeTopology decision_list(int depth) {
        require_depth(depth);
        std::vector<TopoEntry> nodes, leaves;
        for (int d = 1; d <= depth; ++d)
            nodes.push_back({d, d - 1, Slot::left});
        for (int d = 1; d < depth; ++d) leaves.push_back({d, d, Slot::right});
        leaves.push_back({depth, depth, Slot::left});
        leaves.push_back({depth + 1, depth, Slot::right});
        return TreeTopology(TreeKind::tree, std::move(nodes), std::move(leaves));
    }

    static TreeTopology rule_chain(int depth) {
        require_depth(depth);
        std::vector<TopoEntry> nodes;
        for (int d = 1; d <= depth; ++d) nodes.push_back({d, d - 1, Slot::left});
        std::vector<TopoEntry> leaves{{1, depth, Slot::left}};
        return TreeTopology(TreeKind::rule_set, std::move(nodes), std::move(leaves));
    }

    // Two non-isomorphic shapes with the same leaf profile {2: 2, 3: 4}:
    // A splits both subtrees one level further on one side each, B pushes all
    // depth-3 leaves under the right subtree.
    static std::pair<TreeTopology, TreeTopology> equal_profile_pair() {
        TreeTopology a(TreeKind::tree,
                       {{1, 0, Slot::left},
                        {2, 1, Slot::left},
                        {3, 1, Slot::right},
                        {4, 2, Slot::left},
                        {5, 3, Slot::left}},
                       {{1, 2, Slot::right},
                        {2, 3, Slot::right},
                        {3, 4, Slot::left},
                        {4, 4, Slot::right},
                        {5, 5, Slot::left},
                        {6, 5, Slot::right}});
        TreeTopology b(TreeKind::tree,
                       {{1, 0, Slot::left},
                        {2, 1, Slot::left},
                        {3, 1, Slot::right},
                        {4, 3, Slot::left},
                        {5, 3, Slot::right}},
                       {{1, 2, Slot::left},
                        {2, 2, Slot::right},
                        {3, 4, Slot::left},
                        {4, 4, Slot::right},
                        {5, 5, Slot::left},
                        {6, 5, Slot::right}});
        return {std::move(a), std::move(b)};
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["kind"] = kind_ == TreeKind::tree ? "tree" : "rule_set";
        auto dump = [](const std::vector<TopoEntry>& es) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& e : es) {
                nlohmann::json o{{"id", e.id}, {"parent", e.parent}};
                if (e.parent != 0) o["slot"] = e.slot == Slot::left ? "left" : "right";
                arr.push_back(o);
            }
            return arr;
        };
        j["nodes"] = dump(nodes_);
        j["leaves"] = dump(leaves_);
        return j;
    }

    static TreeTopology from_json(const nlohmann::json& j) {
        const std::string kind_str = j.at("kind").get<std::string>();
        TreeKind kind;
        if (kind_str == "tree")
            kind = TreeKind::tree;
        else if (kind_str == "rule_set")
            kind = TreeKind::rule_set;
        else
            throw parse_error("topology: unknown kind '" + kind_str + "'");
        auto load = [](const nlohmann::json& arr) {
            std::vector<TopoEntry> es;
            for (const auto& o : arr) {
                TopoEntry e;
                e.id = o.at("id").get<int>();
                e.parent = o.at("parent").get<int>();
                if (e.parent != 0) {
                    const std::string s = o.at("slot").get<std::string>();
                    if (s == "left")
                        e.slot = Slot::left;
                    else if (s == "right")
                        e.slot = Slot::right;
                    else
                        throw parse_error("topology: unknown slot '" + s + "'");
                }
                es.push_back(e);
            }
            return es;
        };
        return TreeTopology(kind, load(j.at("nodes")), load(j.at("leaves")));
    }

    static TreeTopology from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw parse_error("topology: cannot open '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw parse_error("topology '" + path + "': " + e.what());
        }
        return from_json(j);
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw parse_error("topology: cannot write '" + path + "'");
        out << to_json().dump(2) << "\n";
    }

private:
    static void require_depth(int d) {
        if (d < 1) throw std::invalid_argument("TreeTopology: depth must be >= 1");
    }

    void validate_and_index() {
        const int n = n_nodes(), l = n_leaves();
        if (n < 1) throw std::invalid_argument("TreeTopology: needs at least one internal node");
        if (l < 1) throw std::invalid_argument("TreeTopology: needs at least one leaf");
        auto check_dense = [](const std::vector<TopoEntry>& es, const char* what) {
            std::vector<bool> seen(es.size() + 1, false);
            for (const auto& e : es) {
                if (e.id < 1 || e.id > static_cast<int>(es.size()) || seen[e.id])
                    throw std::invalid_argument(std::string("TreeTopology: ") + what +
                                                " ids must be dense from 1");
                seen[e.id] = true;
            }
        };
        check_dense(nodes_, "node");
        check_dense(leaves_, "leaf");
        std::sort(nodes_.begin(), nodes_.end(), [](auto& a, auto& b) { return a.id < b.id; });
        std::sort(leaves_.begin(), leaves_.end(), [](auto& a, auto& b) { return a.id < b.id; });

        int roots = 0;
        for (const auto& e : nodes_) {
            if (e.parent == 0)
                ++roots;
            else if (e.parent < 1 || e.parent > n)
                throw std::invalid_argument("TreeTopology: node parent out of range");
        }
        if (roots != 1) throw std::invalid_argument("TreeTopology: exactly one root required");
        for (const auto& e : leaves_)
            if (e.parent < 1 || e.parent > n)
                throw std::invalid_argument("TreeTopology: leaves must hang off an internal node");

        // Child slots: at most one occupant each, tracked as node or leaf.
        struct Child {
            int node = 0, leaf = 0;  // 1-based ids, 0 = empty
        };
        std::vector<Child> left(n + 1), right(n + 1);
        auto occupy = [&](const TopoEntry& e, bool is_leaf) {
            if (e.parent == 0) return;
            Child& c = e.slot == Slot::left ? left[e.parent] : right[e.parent];
            if (c.node || c.leaf)
                throw std::invalid_argument("TreeTopology: duplicate child slot under node " +
                                            std::to_string(e.parent));
            (is_leaf ? c.leaf : c.node) = e.id;
        };
        for (const auto& e : nodes_) occupy(e, false);
        for (const auto& e : leaves_) occupy(e, true);

        // Depth of every node, walking parents with cycle detection.
        std::vector<int> depth(n + 1, -1);
        for (int id = 1; id <= n; ++id) {
            int steps = 0, cur = id;
            std::vector<int> chain;
            while (depth[cur] < 0) {
                chain.push_back(cur);
                const int p = nodes_[cur - 1].parent;
                if (p == 0) {
                    depth[cur] = 1;
                    chain.pop_back();
                    break;
                }
                cur = p;
                if (++steps > n) throw std::invalid_argument("TreeTopology: cycle detected");
            }
            for (auto it = chain.rbegin(); it != chain.rend(); ++it)
                depth[*it] = depth[nodes_[*it - 1].parent] + 1;
        }

        if (kind_ == TreeKind::tree) {
            for (int id = 1; id <= n; ++id) {
                const bool has_left = left[id].node || left[id].leaf;
                const bool has_right = right[id].node || right[id].leaf;
                if (!has_left || !has_right)
                    throw std::invalid_argument(
                        "TreeTopology: tree kind requires two children per internal node (node " +
                        std::to_string(id) + ")");
            }
        } else {
            if (l != 1)
                throw std::invalid_argument("TreeTopology: rule_set has exactly one leaf");
            for (int id = 1; id <= n; ++id) {
                if (right[id].node || right[id].leaf)
                    throw std::invalid_argument("TreeTopology: rule_set must be a left-only chain");
                if ((left[id].node != 0) + (left[id].leaf != 0) != 1)
                    throw std::invalid_argument("TreeTopology: rule_set node " + std::to_string(id) +
                                                " must have exactly one child");
            }
        }

        leaf_paths_.assign(l, {});
        for (const auto& leaf : leaves_) {
            std::vector<PathStep> path;
            int cur = leaf.parent;
            bool side_left = leaf.slot == Slot::left;
            path.push_back({cur - 1, side_left});
            while (nodes_[cur - 1].parent != 0) {
                const auto& e = nodes_[cur - 1];
                path.push_back({e.parent - 1, e.slot == Slot::left});
                cur = e.parent;
            }
            std::reverse(path.begin(), path.end());
            leaf_paths_[leaf.id - 1] = std::move(path);
        }
    }

    TreeKind kind_;
    std::vector<TopoEntry> nodes_, leaves_;
    std::vector<std::vector<PathStep>> leaf_paths_;
};

// Q(d) = number of leaves whose root path crosses d internal nodes.
inline LeafProfile profile_of(const TreeTopology& topo) {
    std::map<int, long> counts;
    for (int l = 0; l < topo.n_leaves(); ++l) ++counts[topo.leaf_depth(l)];
    return LeafProfile(std::move(counts));
}

}  // namespace treetangent
