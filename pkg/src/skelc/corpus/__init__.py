"""Bundled example programs.

Two program families, each in several variants that compute the same
thing by different means: matrix multiplication over row-major integer
matrices and dot products of binary trees.  The *_enc variants run on
encoded call-structure lists, the *_enc_par and *_farm variants name
their skeletons explicitly, the rest are ordinary recursions.
"""

from dataclasses import dataclass
from importlib import resources


FILES = {
    "matmul": "matmul.mfl",
    "matmul_skel": "matmul_skel.mfl",
    "matmul_fused": "matmul_fused.mfl",
    "matmul_enc": "matmul_enc.mfl",
    "matmul_enc_par": "matmul_enc_par.mfl",
    "matmul_farm": "matmul_farm.mfl",
    "tree_dot": "tree_dot.mfl",
    "tree_dot_enc": "tree_dot_enc.mfl",
    "tree_dot_enc_par": "tree_dot_enc_par.mfl",
}

# Variants that accept the same inputs and must agree on them.
MATMUL_VARIANTS = (
    "matmul",
    "matmul_skel",
    "matmul_fused",
    "matmul_enc",
    "matmul_enc_par",
    "matmul_farm",
)
TREE_VARIANTS = ("tree_dot", "tree_dot_enc", "tree_dot_enc_par")


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    file: str
    # original | distilled | hand-parallel | expected-encoded
    role: str
    # which family of inputs the program accepts
    family: str
    # how benchmark inputs are generated for this family
    generator: str

_MATMUL_GEN = "two n x n matrices of small ints (size = n)"
_TREE_GEN = "two independent random binary trees of n nodes (size = n)"

_ROLES = {
    "matmul": "original",
    "matmul_skel": "hand-parallel",
    "matmul_fused": "distilled",
    "matmul_enc": "expected-encoded",
    "matmul_enc_par": "hand-parallel",
    "matmul_farm": "hand-parallel",
    "tree_dot": "distilled",
    "tree_dot_enc": "expected-encoded",
    "tree_dot_enc_par": "hand-parallel",
}

# The sequential program benchmark speedups are measured against.
BASELINES = {"matmul": "matmul", "tree_dot": "tree_dot"}


def corpus() -> list[CorpusEntry]:
    out = []
    for name, fname in FILES.items():
        family = "matmul" if name in MATMUL_VARIANTS else "tree_dot"
        gen = _MATMUL_GEN if family == "matmul" else _TREE_GEN
        out.append(CorpusEntry(name, fname, _ROLES[name], family, gen))
    return out


def corpus_names() -> list[str]:
    return list(FILES)


def corpus_source(name: str) -> str:
    """Source text of a bundled program; KeyError for unknown names."""
    fname = FILES[name]
    return resources.files(__package__).joinpath(fname).read_text()
