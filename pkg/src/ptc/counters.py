from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass
class OpCounter:
    """Elementary-operation tallies, summed over everything a decoder touched.

    ``solver``  cell visits inside the assignment solvers (Hungarian, Murty, BB,
                brute force);
    ``demod``   per-sample detector decisions (threshold or envelope compare);
    ``compare`` cell comparisons between a received pattern and codebook entries;
    ``demap``   permutation-to-binary lookups;
    ``viterbi`` add-compare-select steps.
    """

    solver: int = 0
    demod: int = 0
    compare: int = 0
    demap: int = 0
    viterbi: int = 0

    def add(self, other: "OpCounter") -> "OpCounter":
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}
