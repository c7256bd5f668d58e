"""Set partitions of {0..m-1} with the refinement order.

Partitions are the combinatorial substrate of the eliminator: abstract
world states are (partition, size) pairs, and possibility under functions
and surjections is coarsening of the induced equality pattern.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

MAX_GROUND = 8


@dataclass(frozen=True)
class SetPartition:
    """A partition of {0..m-1} in canonical form.

    Blocks are internally sorted and ordered by their minimum element.
    The unique partition of the empty set has no blocks.
    """

    m: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = set()
        for block in self.blocks:
            if not block:
                raise ValueError("empty block")
            if tuple(sorted(block)) != block:
                raise ValueError(f"block not sorted: {block}")
            seen.update(block)
        if seen != set(range(self.m)):
            raise ValueError(f"blocks do not cover 0..{self.m - 1}")
        if sum(len(b) for b in self.blocks) != self.m:
            raise ValueError("blocks overlap")
        if list(self.blocks) != sorted(self.blocks, key=lambda b: b[0]):
            raise ValueError("blocks not ordered by minimum element")

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def block_of(self, i: int) -> int:
        """Index of the block containing i."""
        for k, block in enumerate(self.blocks):
            if i in block:
                return k
        raise ValueError(f"{i} not in ground set of size {self.m}")

    def block_index(self) -> tuple[int, ...]:
        """Map element -> block number (a restricted-growth string)."""
        out = [0] * self.m
        for k, block in enumerate(self.blocks):
            for i in block:
                out[i] = k
        return tuple(out)

    def same_block(self, i: int, j: int) -> bool:
        return self.block_of(i) == self.block_of(j)

    def __str__(self) -> str:
        return "".join("{" + " ".join(str(i) for i in b) + "}" for b in self.blocks)

    def __repr__(self) -> str:
        return f"SetPartition({self})" if self.m else "SetPartition(empty)"


def from_blocks(m: int, blocks) -> SetPartition:
    """Canonicalize arbitrary block iterables into a SetPartition."""
    canon = sorted((tuple(sorted(b)) for b in blocks if b), key=lambda b: b[0])
    return SetPartition(m, tuple(canon))


def discrete(m: int) -> SetPartition:
    return SetPartition(m, tuple((i,) for i in range(m)))


def merged(m: int) -> SetPartition:
    return SetPartition(m, (tuple(range(m)),) if m else ())


def kernel_partition(values) -> SetPartition:
    """Partition positions by equality of values: i ~ j iff values[i] == values[j]."""
    values = list(values)
    blocks: dict = {}
    for i, v in enumerate(values):
        blocks.setdefault(v, []).append(i)
    return from_blocks(len(values), blocks.values())


def _from_rgs(rgs: tuple[int, ...]) -> SetPartition:
    nblocks = max(rgs) + 1 if rgs else 0
    blocks = [[] for _ in range(nblocks)]
    for i, b in enumerate(rgs):
        blocks[b].append(i)
    return from_blocks(len(rgs), blocks)


@lru_cache(maxsize=None)
def enumerate_partitions(m: int) -> tuple[SetPartition, ...]:
    """All partitions of {0..m-1}, finer patterns first (descending RGS order)."""
    if m < 0:
        raise ValueError("negative ground set")
    if m > MAX_GROUND:
        raise ValueError(f"ground set {m} exceeds bound {MAX_GROUND}")
    rgss: list[tuple[int, ...]] = []

    def grow(prefix: list[int], top: int):
        if len(prefix) == m:
            rgss.append(tuple(prefix))
            return
        for b in range(top + 2):
            prefix.append(b)
            grow(prefix, max(top, b))
            prefix.pop()

    grow([], -1)
    rgss.sort(reverse=True)
    return tuple(_from_rgs(r) for r in rgss)


@lru_cache(maxsize=None)
def partition_index(p: SetPartition) -> int:
    """Position of p in enumerate_partitions(p.m)."""
    return enumerate_partitions(p.m).index(p)


def refines(p: SetPartition, q: SetPartition) -> bool:
    """P <= Q: every block of P is contained in some block of Q."""
    if p.m != q.m:
        raise ValueError(f"mismatched ground sets: {p.m} vs {q.m}")
    qix = q.block_index()
    return all(len({qix[i] for i in block}) <= 1 for block in p.blocks)


def coarsenings(p: SetPartition) -> tuple[SetPartition, ...]:
    """All Q with refines(p, Q), in canonical enumeration order."""
    return tuple(q for q in enumerate_partitions(p.m) if refines(p, q))


def restrict(p: SetPartition, keep: tuple[int, ...]) -> SetPartition:
    """Restrict p to the given positions, relabelled to 0..len(keep)-1."""
    pos = {orig: new for new, orig in enumerate(keep)}
    blocks = []
    for block in p.blocks:
        sub = [pos[i] for i in block if i in pos]
        if sub:
            blocks.append(sub)
    return from_blocks(len(keep), blocks)


def insert_into_block(p: SetPartition, pos: int, block_no: int | None) -> SetPartition:
    """Extend p with a new element at position pos (old positions >= pos shift up).

    The new element joins block block_no, or forms a new singleton when None.
    """
    shifted = [[i if i < pos else i + 1 for i in block] for block in p.blocks]
    if block_no is None:
        shifted.append([pos])
    else:
        shifted[block_no].append(pos)
    return from_blocks(p.m + 1, shifted)


def parse_partition(text: str, m: int | None = None) -> SetPartition:
    """Parse the text form, e.g. "{0 1}{2}"; the empty string is the m=0 partition."""
    text = text.strip()
    blocks = []
    rest = text
    while rest:
        if not rest.startswith("{"):
            raise ValueError(f"bad partition text: {text!r}")
        close = rest.index("}")
        inner = rest[1:close].replace(",", " ").split()
        blocks.append([int(t) for t in inner])
        rest = rest[close + 1 :].strip()
    ground = 1 + max((i for b in blocks for i in b), default=-1)
    if m is not None and m != ground:
        raise ValueError(f"partition {text!r} covers {ground} positions, expected {m}")
    return from_blocks(ground, blocks)
