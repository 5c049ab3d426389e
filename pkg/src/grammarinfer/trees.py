"""Tree indexing and in-place rewrites used by the inference loop.

A *label* is what merging operates on: either a nonterminal
(every node carrying it) or a terminal standing for the implicit dummy
parent of its *free* leaves, i.e. leaves that are not the only child of
their parent.  A leaf that is the sole child of a node already has that node
as its parent label.
"""

from __future__ import annotations

from collections import defaultdict

from .grammar import Nonterminal, Terminal, TreeNode, symbol_key

PAD = None


def label_key(label):
    return symbol_key(label)


def _is_free_leaf(node, parent):
    return node.is_leaf and parent is not None and len(parent.children) > 1


def context_of(syms, i, length, k):
    left = tuple(syms[max(0, i - k):i])
    right = tuple(syms[i + length:i + length + k])
    return ((PAD,) * (k - len(left)) + left, right + (PAD,) * (k - len(right)))


class TreeIndex:
    """Snapshot of node spans, depths and label occurrences over all trees."""

    def __init__(self, trees, k=2):
        self.trees = trees
        self.k = k
        self.span = {}
        self.depth = {}
        self.order = {}
        self.internal = []  # (tree index, node, depth) in preorder
        self.label_sites = defaultdict(list)
        self.label_nodes = defaultdict(list)
        self.label_depth = {}
        self.label_contexts = defaultdict(set)
        for ti, tree in enumerate(trees):
            self._index(ti, tree)

    def _index(self, ti, tree):
        offset = 0
        preorder = 0
        starts = {}
        stack = [(tree, 0, None, 0, False)]
        visits = []
        while stack:
            node, depth, parent, idx, done = stack.pop()
            if node.is_leaf:
                self.order[id(node)] = (ti, preorder)
                preorder += 1
                start = offset
                offset += len(node.token.text)
                visits.append((node, depth, start, offset, parent, idx))
                continue
            if done:
                visits.append((node, depth, starts[id(node)], offset, parent, idx))
                continue
            starts[id(node)] = offset
            self.order[id(node)] = (ti, preorder)
            preorder += 1
            self.internal.append((ti, node, depth))
            stack.append((node, depth, parent, idx, True))
            for j in range(len(node.children) - 1, -1, -1):
                stack.append((node.children[j], depth + 1, node, j, False))
        # visits arrive in postorder; label lists must follow preorder
        visits.sort(key=lambda v: self.order[id(v[0])])
        for node, depth, start, end, parent, idx in visits:
            self.span[id(node)] = (ti, start, end)
            self.depth[id(node)] = depth
            if node.is_leaf and not _is_free_leaf(node, parent):
                continue
            label = node.symbol
            self.label_sites[label].append((ti, start, end))
            self.label_nodes[label].append(node)
            if depth < self.label_depth.get(label, 1 << 30):
                self.label_depth[label] = depth
            if parent is None:
                ctx = ((PAD,) * self.k, (PAD,) * self.k)
            else:
                ctx = context_of([c.symbol for c in parent.children], idx, 1, self.k)
            self.label_contexts[label].add(ctx)

    def labels(self):
        """All labels ordered by shortest distance from a root, then by label key."""
        return sorted(self.label_sites, key=lambda l: (self.label_depth[l], label_key(l)))

    def occurrence_span(self, parent, i, length):
        ti, start, _ = self.span[id(parent.children[i])]
        _, _, end = self.span[id(parent.children[i + length - 1])]
        return (ti, start, end)


# --- rewrites ----------------------------------------------------------------


def iter_internal(tree):
    stack = [tree]
    while stack:
        node = stack.pop()
        if not node.is_leaf:
            yield node
            stack.extend(reversed(node.children))


def collapse(trees):
    """Remove X[X[...]] single-child chains; they only add unit self-cycles."""
    for t, tree in enumerate(trees):
        while (
            len(tree.children) == 1
            and not tree.children[0].is_leaf
            and tree.children[0].symbol == tree.symbol
        ):
            tree = tree.children[0]
        trees[t] = tree
        for node in iter_internal(tree):
            for j, child in enumerate(node.children):
                while (
                    not child.is_leaf
                    and len(child.children) == 1
                    and not child.children[0].is_leaf
                    and child.children[0].symbol == child.symbol
                ):
                    child = child.children[0]
                node.children[j] = child


def relabel(trees, old: Nonterminal, new: Nonterminal):
    for tree in trees:
        for node in iter_internal(tree):
            if node.symbol == old:
                node.symbol = new


def wrap_free_leaves(trees, terminal: Terminal, label: Nonterminal, only=None):
    """Put free leaves with ``terminal`` text (or just the leaves in ``only``) under ``label``."""
    for tree in trees:
        for node in list(iter_internal(tree)):
            if len(node.children) < 2:
                continue
            for j, child in enumerate(node.children):
                if child.is_leaf and child.symbol == terminal and (only is None or child in only):
                    node.children[j] = TreeNode(label, [child])


def wrap_spans(occurrences, label):
    """Group each (parent, start, length) sibling run under a new ``label`` node.

    Occurrences in one parent must not overlap.  Returns the new nodes.
    """
    by_parent = defaultdict(list)
    for parent, i, length in occurrences:
        by_parent[id(parent)].append((parent, i, length))
    created = []
    for group in by_parent.values():
        for parent, i, length in sorted(group, key=lambda o: -o[1]):
            node = TreeNode(label, parent.children[i:i + length])
            parent.children[i:i + length] = [node]
            created.append(node)
    return created


def select_disjoint(occurrences, taken=None):
    """Greedy leftmost non-overlapping choice per parent (input sorted by position)."""
    taken = {} if taken is None else taken
    chosen = []
    for parent, i, length in occurrences:
        used = taken.setdefault(id(parent), [])
        if any(i < e and s < i + length for s, e in used):
            continue
        used.append((i, i + length))
        chosen.append((parent, i, length))
    return chosen


def find_runs(trees, rhs):
    """Non-overlapping sibling runs equal to ``rhs`` that are not a node's entire child list."""
    found = []
    n = len(rhs)
    for tree in trees:
        for node in iter_internal(tree):
            syms = [c.symbol for c in node.children]
            if len(syms) <= n:
                continue
            i = 0
            while i + n <= len(syms):
                if tuple(syms[i:i + n]) == rhs:
                    found.append((node, i, n))
                    i += n
                else:
                    i += 1
    return found
