"""Order-statistic multiset of real numbers.

Supports insert, delete, select (k-th smallest) and rank counting in
O(log m) expected time. Duplicates are stored as per-key frequencies.
The split-profile sweep keeps one of these up to date while the split
point moves, which is what makes the incremental median affordable.
"""

from __future__ import annotations

import math
import random
from typing import Iterable, Optional


class _Node:
    __slots__ = ("key", "priority", "freq", "size", "left", "right")

    def __init__(self, key: float, priority: float) -> None:
        self.key = key
        self.priority = priority
        self.freq = 1
        self.size = 1
        self.left: Optional[_Node] = None
        self.right: Optional[_Node] = None


def _size(node: Optional[_Node]) -> int:
    return 0 if node is None else node.size


def _update(node: _Node) -> None:
    node.size = node.freq + _size(node.left) + _size(node.right)


def _rotate_right(node: _Node) -> _Node:
    left = node.left
    node.left = left.right
    left.right = node
    _update(node)
    _update(left)
    return left


def _rotate_left(node: _Node) -> _Node:
    right = node.right
    node.right = right.left
    right.left = node
    _update(node)
    _update(right)
    return right


class DiffMultiset:
    """Treap-backed multiset with order statistics.

    The name reflects its main use: holding the multiset of pairwise
    differences x_j - x_i across a split of a series. Any finite floats
    can be stored.
    """

    def __init__(self, values: Iterable[float] = (), seed: int = 0x2C7E15D1) -> None:
        # fixed seed: identical op sequences build identical trees
        self._rng = random.Random(seed)
        self._root: Optional[_Node] = None
        for v in values:
            self.insert(v)

    def __len__(self) -> int:
        return _size(self._root)

    @staticmethod
    def _check(value: float) -> float:
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"multiset values must be finite, got {value!r}")
        return value

    def insert(self, value: float) -> None:
        value = self._check(value)
        self._root = self._insert(self._root, value)

    def _insert(self, node: Optional[_Node], key: float) -> _Node:
        if node is None:
            return _Node(key, self._rng.random())
        if key == node.key:
            node.freq += 1
        elif key < node.key:
            node.left = self._insert(node.left, key)
            if node.left.priority < node.priority:
                node = _rotate_right(node)
        else:
            node.right = self._insert(node.right, key)
            if node.right.priority < node.priority:
                node = _rotate_left(node)
        _update(node)
        return node

    def delete(self, value: float) -> None:
        """Remove one copy of ``value``; KeyError if it is not present."""
        value = self._check(value)
        self._root, removed = self._delete(self._root, value)
        if not removed:
            raise KeyError(f"value {value!r} not in multiset")

    def _delete(self, node: Optional[_Node], key: float):
        if node is None:
            return None, False
        if key < node.key:
            node.left, removed = self._delete(node.left, key)
        elif key > node.key:
            node.right, removed = self._delete(node.right, key)
        else:
            removed = True
            if node.freq > 1:
                node.freq -= 1
            else:
                return self._remove_node(node), True
        _update(node)
        return node, removed

    def _remove_node(self, node: _Node) -> Optional[_Node]:
        # rotate the doomed node down until one side is empty, then splice
        if node.left is None:
            return node.right
        if node.right is None:
            return node.left
        if node.left.priority < node.right.priority:
            node = _rotate_right(node)
            node.right = self._remove_node(node.right)
        else:
            node = _rotate_left(node)
            node.left = self._remove_node(node.left)
        _update(node)
        return node

    def select(self, r: int) -> float:
        """Return the r-th smallest element, 1-based, counting duplicates."""
        r = int(r)
        if r < 1 or r > len(self):
            raise IndexError(f"order statistic {r} out of range 1..{len(self)}")
        node = self._root
        while node is not None:
            left = _size(node.left)
            if r <= left:
                node = node.left
            elif r <= left + node.freq:
                return node.key
            else:
                r -= left + node.freq
                node = node.right
        raise AssertionError("unreachable: size bookkeeping is broken")

    def count_less(self, value: float) -> int:
        """Number of stored elements strictly below ``value``."""
        value = self._check(value)
        node = self._root
        total = 0
        while node is not None:
            if value <= node.key:
                node = node.left
            else:
                total += _size(node.left) + node.freq
                node = node.right
        return total

    def count_at_most(self, value: float) -> int:
        """Number of stored elements less than or equal to ``value``."""
        value = self._check(value)
        node = self._root
        total = 0
        while node is not None:
            if value < node.key:
                node = node.left
            else:
                total += _size(node.left) + node.freq
                node = node.right
        return total
