"""Software cost counters: a flat int64 array threaded through every kernel.

Index meanings loosely follow PTX instruction classes:
``BRANCH`` ~ bra, ``IMAGE_READS`` ~ ld.global, ``SCRATCH_READS``/``SCRATCH_WRITES``
~ ld.shared/st.shared, ``MAC`` ~ the add/mul work inside the gradient kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

BRANCH = 0
IMAGE_READS = 1
SCRATCH_READS = 2
SCRATCH_WRITES = 3
MAC = 4
N_COUNTERS = 5

STAGES = ("fast", "harris", "nms", "centroid")


def new_counts(rows: int | None = None) -> np.ndarray:
    shape = N_COUNTERS if rows is None else (rows, N_COUNTERS)
    return np.zeros(shape, dtype=np.int64)


@dataclass(frozen=True)
class CountReport:
    branch_evals: int = 0
    image_reads: int = 0
    scratch_reads: int = 0
    scratch_writes: int = 0
    mac_ops: int = 0
    stages: dict = field(default_factory=dict)

    @classmethod
    def from_array(cls, arr) -> CountReport:
        return cls(*(int(v) for v in np.asarray(arr)[:N_COUNTERS]))

    @classmethod
    def from_stage_array(cls, arr) -> CountReport:
        """Build a total from a (len(STAGES), N_COUNTERS) array, keeping the per-stage breakdown."""
        arr = np.asarray(arr)
        stages = {name: cls.from_array(arr[i]) for i, name in enumerate(STAGES)}
        return cls(*(int(v) for v in arr.sum(axis=0)), stages=stages)

    def counters(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "stages"}

    def __add__(self, other: CountReport) -> CountReport:
        a, b = self.counters(), other.counters()
        stages = dict(self.stages)
        for name, rep in other.stages.items():
            stages[name] = stages[name] + rep if name in stages else rep
        return CountReport(**{k: a[k] + b[k] for k in a}, stages=stages)

    def to_text(self) -> str:
        """Flat ``key=value`` block; stage lines first, totals last."""
        lines = []
        for name, rep in self.stages.items():
            lines += [f"{name}.{k}={v}" for k, v in rep.counters().items()]
        lines += [f"total.{k}={v}" for k, v in self.counters().items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> CountReport:
        groups: dict[str, dict[str, int]] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            group, _, name = key.partition(".")
            groups.setdefault(group, {})[name] = int(value)
        total = groups.pop("total", {})
        return cls(**total, stages={g: cls(**v) for g, v in groups.items()})
