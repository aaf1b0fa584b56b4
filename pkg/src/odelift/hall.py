"""Hall bases of free Lie algebras in the deg-left-right order.

A Hall word is a binary tree with leaves in the generators 1..r, subject to
the usual Hall conditions; the deg-left-right order compares degree first,
then the left subtree, then the right subtree.  Trees are interned, so equal
trees are the same object and dictionary lookups are cheap.  Everything
downstream (brackets, polynomials, certificates) is phrased in terms of these
words.
"""

from __future__ import annotations

import math
import threading


class CapExceededError(RuntimeError):
    """A configured resource cap (basis size, series truncation) was hit."""


DEFAULT_BASIS_CAP = 200_000

_intern_lock = threading.Lock()
_interned: dict = {}


class HallWord:
    """An interned Hall tree together with its word and ordering key.

    ``word`` is the tuple of leaves read left to right and ``degree`` its
    length.  ``key`` is a nested tuple realizing the deg-left-right order as
    plain tuple comparison.  ``spine_bound`` is the largest degree of a left
    subtree along the right spine (0 for generators); the word survives the
    quotient killing brackets of two elements of degree >= m exactly when
    spine_bound <= m - 1.
    """

    __slots__ = ("left", "right", "gen", "degree", "word", "key", "spine_bound")

    def __lt__(self, other):
        return self.key < other.key

    def __le__(self, other):
        return self.key <= other.key

    def __gt__(self, other):
        return self.key > other.key

    def __ge__(self, other):
        return self.key >= other.key

    def __repr__(self):
        if max(self.word) <= 9:
            return "".join(str(g) for g in self.word)
        return ".".join(str(g) for g in self.word)


def _intern(left, right, gen, degree, word, key, spine_bound):
    with _intern_lock:
        existing = _interned.get(key)
        if existing is not None:
            return existing
        w = HallWord.__new__(HallWord)
        w.left = left
        w.right = right
        w.gen = gen
        w.degree = degree
        w.word = word
        w.key = key
        w.spine_bound = spine_bound
        _interned[key] = w
        return w


def generator(index):
    """The degree-1 Hall word for generator ``index`` (1-based)."""
    if index < 1:
        raise ValueError("generator indices start at 1, got %r" % (index,))
    return _intern(None, None, index, 1, (index,), (1, index, index), 0)


def is_hall_pair(a, b):
    """Whether the tree (a, b) satisfies the Hall conditions."""
    return a < b and (b.degree == 1 or b.left <= a)


def hall_pair(a, b):
    """The Hall word with left subtree ``a`` and right subtree ``b``."""
    if not is_hall_pair(a, b):
        raise ValueError("(%r, %r) is not a Hall tree" % (a, b))
    degree = a.degree + b.degree
    return _intern(a, b, 0, degree, a.word + b.word,
                   (degree, a.key, b.key), max(a.degree, b.spine_bound))


def compare(a, b):
    """Deg-left-right comparison: -1, 0 or 1."""
    if a.key < b.key:
        return -1
    if a.key == b.key:
        return 0
    return 1


def enumerate_words(rank, max_degree, left_degree_cap=None, cap=DEFAULT_BASIS_CAP):
    """All Hall words of degree <= max_degree in deg-left-right order.

    With ``left_degree_cap = m - 1`` only the words surviving the layer-m
    commutator quotient are produced (their left subtrees along the right
    spine all have degree <= m - 1), directly and without enumerating the
    full basis.
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    layers = [[generator(i) for i in range(1, rank + 1)]]
    total = rank
    for k in range(2, max_degree + 1):
        fresh = []
        top = k - 1 if left_degree_cap is None else min(k - 1, left_degree_cap)
        for dl in range(1, top + 1):
            for a in layers[dl - 1]:
                for b in layers[k - dl - 1]:
                    if a < b and (b.degree == 1 or b.left <= a):
                        fresh.append(hall_pair(a, b))
        fresh.sort()
        total += len(fresh)
        if total > cap:
            raise CapExceededError(
                "Hall basis size exceeds cap %d at degree %d" % (cap, k))
        layers.append(fresh)
    return [w for layer in layers for w in layer]


class HallBasis:
    """The ordered list of Hall words of degree <= max_degree for a rank."""

    def __init__(self, rank, max_degree, words=None, cap=DEFAULT_BASIS_CAP):
        self.rank = rank
        self.max_degree = max_degree
        self.words = enumerate_words(rank, max_degree, cap=cap) if words is None else words
        self.index = {w: i for i, w in enumerate(self.words)}
        self._by_word = {w.word: w for w in self.words}

    def __len__(self):
        return len(self.words)

    def __contains__(self, w):
        return w in self.index

    def layer(self, degree):
        """The words of exactly the given degree, in order."""
        return [w for w in self.words if w.degree == degree]

    def word_text(self, w):
        return format_word(w, self.rank)

    def parse_word(self, text):
        """Inverse of ``word_text`` for words in this basis."""
        letters = parse_word_letters(text, self.rank)
        w = self._by_word.get(letters)
        if w is None:
            raise ValueError("%r is not a Hall word of this basis" % (text,))
        return w

    def to_json(self):
        return [self.word_text(w) for w in self.words]


def enumerate_hall_words(rank, max_degree, cap=DEFAULT_BASIS_CAP):
    """Construct the full Hall basis up to the given degree."""
    return HallBasis(rank, max_degree, cap=cap)


def format_word(w, rank):
    """Render a word: digit string for rank <= 9, dot-separated otherwise."""
    if rank <= 9:
        return "".join(str(g) for g in w.word)
    return ".".join(str(g) for g in w.word)


def parse_word_letters(text, rank):
    if rank <= 9:
        letters = tuple(int(c) for c in text)
    else:
        letters = tuple(int(part) for part in text.split("."))
    if not letters or any(g < 1 or g > rank for g in letters):
        raise ValueError("invalid word %r for rank %d" % (text, rank))
    return letters


def factorize(w):
    """Split a composite Hall word into its left and right subtrees."""
    if w.degree < 2:
        raise ValueError("cannot factorize the degree-1 word %r" % (w,))
    return w.left, w.right


def ad_factorization(w):
    """The longest factorization of ``w`` as repeated left bracketing.

    Returns ``(exponents, core)`` where ``exponents`` is a list of
    (word, multiplicity) pairs, outermost first.  Applying the exponent words
    right to left by iterated bracketing onto the core rebuilds the tree of
    ``w``.
    """
    if w.degree < 2:
        raise ValueError("cannot factorize the degree-1 word %r" % (w,))
    lefts = []
    node = w
    while node.degree >= 2:
        # Peeling is valid as long as the outermost left factor stays
        # below the remaining core.
        if lefts and not lefts[0] < node.right:
            break
        lefts.append(node.left)
        node = node.right
    exponents = []
    for left in lefts:
        if exponents and exponents[-1][0] is left:
            exponents[-1] = (left, exponents[-1][1] + 1)
        else:
            exponents.append((left, 1))
    return exponents, node


def rebuild_from_ad(exponents, core):
    """Inverse of ``ad_factorization``: fold the exponents back onto the core."""
    node = core
    for word, mult in reversed(exponents):
        for _ in range(mult):
            node = hall_pair(word, node)
    return node


def format_ad_factorization(w, rank):
    """Render the longest factorization, e.g. ``(2)^3(1)(12)``."""
    exponents, core = ad_factorization(w)
    parts = []
    for word, mult in exponents:
        text = "(%s)" % format_word(word, rank)
        if mult > 1:
            text += "^%d" % mult
        parts.append(text)
    parts.append("(%s)" % format_word(core, rank))
    return "".join(parts)


def _mobius(n):
    result = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    if n > 1:
        result = -result
    return result


def layer_dimension(rank, degree):
    """Number of Hall words of exactly the given degree (necklace count)."""
    if rank < 1 or degree < 1:
        raise ValueError("rank and degree must be >= 1")
    total = 0
    for d in range(1, degree + 1):
        if degree % d == 0:
            total += _mobius(d) * rank ** (degree // d)
    assert total % degree == 0
    return total // degree


def minimal_layer_word(layer):
    """The smallest Hall word of the given degree for rank >= 2.

    This is the right comb on generators 1, ..., 1, 2.
    """
    if layer < 1:
        raise ValueError("layer must be >= 1")
    if layer == 1:
        return generator(1)
    node = generator(2)
    one = generator(1)
    for _ in range(layer - 1):
        node = hall_pair(one, node)
    return node
