"""Closed paths in the joint resolvent set.

A loop is a piecewise-smooth closed map s in [0,1] -> C^4 whose samples all
stay off the joint spectrum.  Period integrals use the periodic-trapezoid
form  (1/n) sum_j c(z(s_j)) . z'(s_j),  so loops carry their derivative
(analytic when known, spectral differentiation of the samples otherwise).

Two reference loops live in the z1 = z2 = 0 plane, where the spectrum
reduces to the two hyperplanes z0 = z3 and z0 = -z3:

    L1: z(s) = ((3 + w)/2, 0, 0, (3 - w)/2),  w = exp(2*pi*i*s)
        (z0 - z3 = w winds once around 0, z0 + z3 = 3 is constant)
    L2: z(s) = ((3 + w)/2, 0, 0, (w - 3)/2)
        (z0 + z3 = w winds, z0 - z3 = 3 constant)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

AXIS_INDEX = {"z0": 0, "z1": 1, "z2": 2, "z3": 3}


@dataclass
class LoopPath:
    """Closed path; ``fn`` maps an array of parameters s to (len(s), 4)."""

    fn: Callable[[np.ndarray], np.ndarray]
    steps: int = 512
    name: str = "loop"
    dfn: Callable[[np.ndarray], np.ndarray] | None = None

    def samples(self, steps: int | None = None) -> np.ndarray:
        """Points z(s_j) at s_j = j/steps, j = 0..steps (closed: first =
        last)."""
        n = self.steps if steps is None else int(steps)
        if n < 8:
            raise ValueError("a loop needs at least 8 steps")
        s = np.arange(n + 1) / n
        pts = np.asarray(self.fn(s), dtype=complex)
        if pts.shape != (n + 1, 4):
            raise ValueError("loop fn must return an (len(s), 4) array")
        if np.max(np.abs(pts[0] - pts[-1])) > 1e-12:
            raise ValueError("loop is not closed")
        return pts

    def derivatives(self, steps: int | None = None) -> np.ndarray:
        """dz/ds at the interior grid s_j = j/steps, j = 0..steps-1.

        Falls back to spectral differentiation of the periodic samples
        when no analytic derivative was supplied.
        """
        n = self.steps if steps is None else int(steps)
        s = np.arange(n) / n
        if self.dfn is not None:
            return np.asarray(self.dfn(s), dtype=complex)
        pts = self.samples(n)[:-1]
        k = np.fft.fftfreq(n, d=1.0 / n)
        if n % 2 == 0:
            k[n // 2] = 0.0  # drop the unpaired Nyquist mode
        return np.fft.ifft(2j * np.pi * k[:, None] * np.fft.fft(pts, axis=0), axis=0)


def loop_L1(steps: int = 512) -> LoopPath:
    def fn(s):
        w = np.exp(2j * np.pi * s)
        z = np.zeros((len(s), 4), dtype=complex)
        z[:, 0] = (3.0 + w) / 2.0
        z[:, 3] = (3.0 - w) / 2.0
        return z

    def dfn(s):
        dw = 1j * np.pi * np.exp(2j * np.pi * s)
        dz = np.zeros((len(s), 4), dtype=complex)
        dz[:, 0] = dw
        dz[:, 3] = -dw
        return dz

    return LoopPath(fn, steps=steps, name="L1", dfn=dfn)


def loop_L2(steps: int = 512) -> LoopPath:
    def fn(s):
        w = np.exp(2j * np.pi * s)
        z = np.zeros((len(s), 4), dtype=complex)
        z[:, 0] = (3.0 + w) / 2.0
        z[:, 3] = (w - 3.0) / 2.0
        return z

    def dfn(s):
        dw = 1j * np.pi * np.exp(2j * np.pi * s)
        dz = np.zeros((len(s), 4), dtype=complex)
        dz[:, 0] = dw
        dz[:, 3] = dw
        return dz

    return LoopPath(fn, steps=steps, name="L2", dfn=dfn)


NAMED_LOOPS = {"L1": loop_L1, "L2": loop_L2}


def circle_loop(
    center: Sequence[complex],
    radius: float,
    coords: Sequence[str],
    signs: Sequence[int] | None = None,
    steps: int = 512,
    name: str = "circle",
) -> LoopPath:
    """Circle in one or more coordinates: z_c(s) = center_c + sign_c*r*w(s)."""
    center = np.asarray([complex(c) for c in center], dtype=complex)
    if center.shape != (4,):
        raise ValueError("center needs 4 coordinates")
    idx = [AXIS_INDEX[c] if isinstance(c, str) else int(c) for c in coords]
    if signs is None:
        signs = [1] * len(idx)
    if len(signs) != len(idx):
        raise ValueError("signs must match coords")

    def fn(s):
        w = radius * np.exp(2j * np.pi * s)
        z = np.tile(center, (len(s), 1))
        for i, sg in zip(idx, signs):
            z[:, i] = center[i] + sg * w
        return z

    def dfn(s):
        dw = radius * 2j * np.pi * np.exp(2j * np.pi * s)
        dz = np.zeros((len(s), 4), dtype=complex)
        for i, sg in zip(idx, signs):
            dz[:, i] = sg * dw
        return dz

    return LoopPath(fn, steps=steps, name=name, dfn=dfn)


def random_axis_loops(
    seed: int, count: int, min_rel_margin: float = 0.25
) -> List[LoopPath]:
    """Seeded random circles in the z1 = z2 = 0 resolvent region.

    Each loop fixes one of z0/z3 and circles the other; candidates are
    rejected until the circle clears both singular hyperplanes z0 = +-z3
    by ``min_rel_margin`` times the radius.
    """
    rng = np.random.default_rng(seed)
    loops: List[LoopPath] = []
    while len(loops) < count:
        c0 = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
        c3 = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
        r = rng.uniform(0.3, 1.5)
        moving = "z0" if rng.integers(2) == 0 else "z3"
        # distance from the circle to the points where z0 = +-z3
        d1 = abs(abs(c0 - c3) - r)
        d2 = abs(abs(c0 + c3) - r)
        if min(d1, d2) < min_rel_margin * r:
            continue
        center = [c0, 0j, 0j, c3]
        loops.append(
            circle_loop(center, r, [moving], name=f"rand{len(loops)}")
        )
    return loops
