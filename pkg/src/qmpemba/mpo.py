"""Matrix-product operator container.

Tensor layout: (left bond, right bond, physical out, physical in), with the
boundary rows/columns already applied, so the first tensor has left bond 1 and
the last has right bond 1.
"""

from __future__ import annotations

import numpy as np

from .errors import ResourceError


class MatrixProductOperator:
    def __init__(self, tensors):
        self.tensors = list(tensors)
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[1] != 1:
            raise ValueError("MPO boundary bonds must have dimension 1")
        for a, b in zip(self.tensors, self.tensors[1:]):
            if a.shape[1] != b.shape[0]:
                raise ValueError("mismatched MPO bond dimensions")

    def __len__(self):
        return len(self.tensors)

    def __getitem__(self, i):
        return self.tensors[i]

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dimension(self) -> int:
        """Largest virtual dimension."""
        return max(t.shape[1] for t in self.tensors[:-1]) if len(self.tensors) > 1 else 1

    def bond_dims(self) -> list:
        return [t.shape[1] for t in self.tensors[:-1]]

    def scaled(self, factor: float) -> "MatrixProductOperator":
        """The operator multiplied by a scalar (absorbed into the first tensor)."""
        tensors = [t.copy() for t in self.tensors]
        tensors[0] = tensors[0] * factor
        return MatrixProductOperator(tensors)

    def to_dense(self, cap: int = 14) -> np.ndarray:
        """Contract all sites into one 2^N x 2^N matrix (small chains only)."""
        n = self.n_sites
        if n > cap:
            raise ResourceError(f"dense MPO contraction refused for n={n} > {cap}")
        run = np.ones((1, 1, 1), dtype=self.tensors[0].dtype)
        for w in self.tensors:
            t = np.tensordot(run, w, axes=([0], [0]))  # (out, in, wr, o, i)
            t = t.transpose(2, 0, 3, 1, 4)
            run = t.reshape(w.shape[1], t.shape[1] * t.shape[2], t.shape[3] * t.shape[4])
        return run[0]
