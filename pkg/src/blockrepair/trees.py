"""Generic syntax trees and tree edit scripts.

The differ is a greedy matcher in the top-down/bottom-up family: exact
subtrees are anchored first (by subtree fingerprint), the remainder is
aligned by node kind and recursed into. Scripts are generated by
simulating the transformation on a working copy, so replaying a script
on its source tree reproduces the target tree by construction.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

__all__ = [
    "GenericTree",
    "EditAction",
    "EditScript",
    "edit_script",
    "apply_edit_script",
    "action_similarity",
    "dice",
]


@dataclass(frozen=True)
class GenericTree:
    """An ordered tree node: kind label, optional value, children."""

    kind: str
    value: str | None = None
    children: tuple["GenericTree", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def fingerprint(self) -> tuple:
        return (self.kind, self.value, tuple(c.fingerprint() for c in self.children))

    def with_children(self, children) -> "GenericTree":
        return GenericTree(self.kind, self.value, tuple(children))


@dataclass(frozen=True)
class EditAction:
    """One step of a tree edit script.

    ``path`` addresses the subject node in the working tree at the moment
    the action is applied (child indices from the root).
    """

    kind: str  # insert | delete | update | move
    node_kind: str
    path: tuple[int, ...]
    old_value: str | None = None
    new_value: str | None = None
    subtree: GenericTree | None = None  # payload for insert
    to_path: tuple[int, ...] | None = None  # destination for move

    def __post_init__(self):
        if self.kind not in ("insert", "delete", "update", "move"):
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.kind == "update" and self.new_value is None and self.old_value is None:
            raise ValueError("update must carry old and new values")


@dataclass(frozen=True)
class EditScript:
    actions: tuple[EditAction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)


# -- mutable working tree ----------------------------------------------------


class _Node:
    __slots__ = ("kind", "value", "children")

    def __init__(self, kind, value, children):
        self.kind = kind
        self.value = value
        self.children = children

    @classmethod
    def thaw(cls, t: GenericTree) -> "_Node":
        return cls(t.kind, t.value, [cls.thaw(c) for c in t.children])

    def freeze(self) -> GenericTree:
        return GenericTree(self.kind, self.value, tuple(c.freeze() for c in self.children))

    def at(self, path) -> "_Node":
        node = self
        for i in path:
            node = node.children[i]
        return node


def _lcs_pairs(a: list, b: list, key_a, key_b) -> list[tuple[int, int]]:
    """Leftmost maximal matching between a and b under the given keys."""
    m, n = len(a), len(b)
    lcs = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        row, nxt = lcs[i], lcs[i + 1]
        for j in range(n - 1, -1, -1):
            if key_a(a[i]) == key_b(b[j]):
                row[j] = nxt[j + 1] + 1
            else:
                row[j] = max(nxt[j], row[j + 1])
    pairs = []
    i = j = 0
    while i < m and j < n:
        if key_a(a[i]) == key_b(b[j]) and lcs[i][j] == lcs[i + 1][j + 1] + 1:
            pairs.append((i, j))
            i += 1
            j += 1
        elif lcs[i + 1][j] >= lcs[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


class _Differ:
    def __init__(self):
        self.actions: list[EditAction] = []

    def run(self, a: GenericTree, b: GenericTree) -> tuple[list[EditAction], GenericTree]:
        work = _Node.thaw(a)
        if a.kind != b.kind:
            # root replacement: delete old root wholesale, insert new
            self.actions.append(EditAction("delete", work.kind, ()))
            self.actions.append(EditAction("insert", b.kind, (), subtree=b))
            return self.actions, b
        self._diff(work, b, ())
        return self.actions, work.freeze()

    def _diff(self, work: _Node, target: GenericTree, path: tuple[int, ...]):
        if work.value != target.value:
            self.actions.append(
                EditAction("update", work.kind, path,
                           old_value=work.value, new_value=target.value)
            )
            work.value = target.value
        self._diff_children(work, target, path)

    def _diff_children(self, work: _Node, target: GenericTree, path):
        cur = work.children
        tgt = list(target.children)

        # pass 1: anchor exact subtrees, preserving order
        exact = _lcs_pairs(cur, tgt,
                           lambda n: n.freeze().fingerprint(),
                           lambda t: t.fingerprint())
        # pass 2: between anchors, pair off same-kind nodes for recursion
        matched: dict[int, int] = dict(exact)
        anchors = [(-1, -1)] + exact + [(len(cur), len(tgt))]
        for (i0, j0), (i1, j1) in zip(anchors, anchors[1:]):
            seg_i = list(range(i0 + 1, i1))
            seg_j = list(range(j0 + 1, j1))
            kind_pairs = _lcs_pairs(
                [cur[i] for i in seg_i], [tgt[j] for j in seg_j],
                lambda n: n.kind, lambda t: t.kind)
            for (si, sj) in kind_pairs:
                matched[seg_i[si]] = seg_j[sj]

        # unmatched source subtrees that reappear verbatim among unmatched
        # targets become moves instead of delete+insert
        unmatched_i = [i for i in range(len(cur)) if i not in matched]
        matched_j = set(matched.values())
        unmatched_j = [j for j in range(len(tgt)) if j not in matched_j]
        by_fp: dict[tuple, list[int]] = {}
        for i in unmatched_i:
            by_fp.setdefault(cur[i].freeze().fingerprint(), []).append(i)
        moves: dict[int, int] = {}  # target index -> source index
        for j in unmatched_j:
            pool = by_fp.get(tgt[j].fingerprint())
            if pool:
                moves[j] = pool.pop(0)

        # rebuild the child list left to right, emitting actions against
        # the evolving working tree
        source_of = {j: i for i, j in matched.items()}
        old_children = list(cur)
        moved_sources = set(moves.values())
        kept = [i for i in range(len(old_children))
                if i in matched or i in moved_sources]

        # delete children that survive in no form, right to left
        for i in reversed(range(len(old_children))):
            if i not in matched and i not in moved_sources:
                idx = work.children.index(old_children[i])
                self.actions.append(
                    EditAction("delete", old_children[i].kind, path + (idx,))
                )
                del work.children[idx]

        # now place/recurse target children in order
        for j, tchild in enumerate(tgt):
            if j in source_of:
                node = old_children[source_of[j]]
                cur_idx = work.children.index(node)
                if cur_idx != j:
                    self.actions.append(
                        EditAction("move", node.kind, path + (cur_idx,),
                                   to_path=path + (j,))
                    )
                    del work.children[cur_idx]
                    work.children.insert(j, node)
                self._diff(node, tchild, path + (j,))
            elif j in moves:
                node = old_children[moves[j]]
                cur_idx = work.children.index(node)
                if cur_idx != j:
                    self.actions.append(
                        EditAction("move", node.kind, path + (cur_idx,),
                                   to_path=path + (j,))
                    )
                    del work.children[cur_idx]
                    work.children.insert(j, node)
            else:
                self.actions.append(
                    EditAction("insert", tchild.kind, path + (j,), subtree=tchild)
                )
                work.children.insert(j, _Node.thaw(tchild))


def edit_script(a: GenericTree, b: GenericTree) -> EditScript:
    """Deterministic edit script whose application transforms a into b."""
    differ = _Differ()
    actions, result = differ.run(a, b)
    assert result.fingerprint() == b.fingerprint()
    return EditScript(tuple(actions))


def apply_edit_script(script: EditScript, a: GenericTree) -> GenericTree:
    """Replay ``script`` on ``a``."""
    root: _Node | None = _Node.thaw(a)
    for act in script:
        if act.kind == "update":
            node = root.at(act.path)
            node.value = act.new_value
        elif act.kind == "delete":
            if not act.path:
                root = None
            else:
                parent = root.at(act.path[:-1])
                del parent.children[act.path[-1]]
        elif act.kind == "insert":
            if not act.path:
                root = _Node.thaw(act.subtree)
            else:
                parent = root.at(act.path[:-1])
                parent.children.insert(act.path[-1], _Node.thaw(act.subtree))
        else:  # move
            parent = root.at(act.path[:-1])
            node = parent.children.pop(act.path[-1])
            dest = root.at(act.to_path[:-1])
            dest.children.insert(act.to_path[-1], node)
    if root is None:
        raise ValueError("script deleted the root without replacement")
    return root.freeze()


def dice(a: Counter, b: Counter) -> float:
    """Dice coefficient between two multisets; both empty -> 1."""
    total = sum(a.values()) + sum(b.values())
    if total == 0:
        return 1.0
    inter = sum((a & b).values())
    return 2.0 * inter / total


def action_similarity(s1: EditScript, s2: EditScript,
                      alpha: float = 0.5, beta: float = 0.5) -> float:
    """Blend of Dice similarities over action kinds and labeled actions."""
    if alpha + beta <= 0:
        raise ValueError("alpha + beta must be positive")
    kinds1 = Counter(act.kind for act in s1)
    kinds2 = Counter(act.kind for act in s2)
    labeled1 = Counter((act.kind, act.node_kind) for act in s1)
    labeled2 = Counter((act.kind, act.node_kind) for act in s2)
    kind_sim = dice(kinds1, kinds2)
    label_sim = dice(labeled1, labeled2)
    return (alpha * kind_sim + beta * label_sim) / (alpha + beta)
