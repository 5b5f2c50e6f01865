#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <utility>
#include <vector>

namespace sreach {

using VarId = std::uint32_t;
using ValueId = std::uint32_t;

/// Decision tree over variable values. Internal nodes test one variable
/// (before or after the action when `post` is set); leaves hold a payload.
///
/// `cases[i]` is the value routed to `children[i]`. Parsed and generated
/// trees are total (one case per domain value, in domain order). Pruned trees
/// may lack edges; lookup of a missing value falls back to the first
/// remaining child.
template <class Leaf>
struct DecisionTree {
    VarId var = 0;
    bool post = false;
    std::vector<ValueId> cases;
    std::vector<DecisionTree> children;
    Leaf leaf{};

    [[nodiscard]] bool is_leaf() const noexcept { return children.empty(); }

    static DecisionTree make_leaf(Leaf payload) {
        DecisionTree t;
        t.leaf = std::move(payload);
        return t;
    }

    /// Total split: children[v] handles value v.
    static DecisionTree make_split(VarId var, std::vector<DecisionTree> children, bool post = false) {
        DecisionTree t;
        t.var = var;
        t.post = post;
        t.cases.resize(children.size());
        for (std::size_t i = 0; i < children.size(); ++i) t.cases[i] = static_cast<ValueId>(i);
        t.children = std::move(children);
        return t;
    }

    [[nodiscard]] const DecisionTree& child_for(ValueId value) const {
        assert(!is_leaf());
        if (value < cases.size() && cases[value] == value) return children[value];
        for (std::size_t i = 0; i < cases.size(); ++i)
            if (cases[i] == value) return children[i];
        return children.front();
    }

    [[nodiscard]] bool has_case(ValueId value) const {
        return std::find(cases.begin(), cases.end(), value) != cases.end();
    }

    bool operator==(const DecisionTree&) const = default;
};

/// Walks `tree` to a leaf. `pre(var)` / `post(var)` supply the value of a
/// variable before / after the action.
template <class Leaf, class PreLookup, class PostLookup>
const Leaf& evaluate(const DecisionTree<Leaf>& tree, PreLookup&& pre, PostLookup&& post) {
    const DecisionTree<Leaf>* node = &tree;
    while (!node->is_leaf()) node = &node->child_for(node->post ? post(node->var) : pre(node->var));
    return node->leaf;
}

/// Calls fn(var, post) for every split node.
template <class Leaf, class Fn>
void for_each_split(const DecisionTree<Leaf>& tree, Fn&& fn) {
    if (tree.is_leaf()) return;
    fn(tree.var, tree.post);
    for (const auto& c : tree.children) for_each_split(c, fn);
}

/// Calls fn(path, leaf) for every leaf; `path` lists (var, value, post) along the way.
struct PathStep {
    VarId var;
    ValueId value;
    bool post;
};

template <class Leaf, class Fn>
void for_each_leaf(const DecisionTree<Leaf>& tree, Fn&& fn) {
    std::vector<PathStep> path;
    auto rec = [&](auto&& self, const DecisionTree<Leaf>& t) -> void {
        if (t.is_leaf()) {
            fn(std::as_const(path), t.leaf);
            return;
        }
        for (std::size_t i = 0; i < t.children.size(); ++i) {
            path.push_back({t.var, t.cases[i], t.post});
            self(self, t.children[i]);
            path.pop_back();
        }
    };
    rec(rec, tree);
}

template <class Leaf>
std::size_t tree_size(const DecisionTree<Leaf>& tree) {
    std::size_t n = 1;
    for (const auto& c : tree.children) n += tree_size(c);
    return n;
}

/// Maps leaf payloads through fn, keeping the split structure.
template <class Out, class Leaf, class Fn>
DecisionTree<Out> map_leaves(const DecisionTree<Leaf>& tree, Fn&& fn) {
    DecisionTree<Out> out;
    out.var = tree.var;
    out.post = tree.post;
    out.cases = tree.cases;
    if (tree.is_leaf()) {
        out.leaf = fn(tree.leaf);
        return out;
    }
    out.children.reserve(tree.children.size());
    for (const auto& c : tree.children) out.children.push_back(map_leaves<Out>(c, fn));
    return out;
}

/// Replaces any split whose children are all identical by that child, bottom-up.
template <class Leaf>
DecisionTree<Leaf> collapse_identical(DecisionTree<Leaf> tree) {
    if (tree.is_leaf()) return tree;
    for (auto& c : tree.children) c = collapse_identical(std::move(c));
    bool same = std::all_of(tree.children.begin() + 1, tree.children.end(),
                            [&](const DecisionTree<Leaf>& c) { return c == tree.children.front(); });
    if (same) return std::move(tree.children.front());
    return tree;
}

} // namespace sreach
