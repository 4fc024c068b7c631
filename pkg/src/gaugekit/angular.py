"""Trigonometric profiles on the circle and sampled functions on the sphere.

Real 2*pi-periodic profiles are stored as finite Fourier series; functions on
S^2 live on a subdivided-icosahedron grid whose nodes come in exact antipodal
pairs, so f(omega) - f(-omega) at nodes involves no interpolation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NonzeroMean

DEFAULT_DEGREE = 64
MEAN_TOL = 1e-10
_REALNESS_TOL = 1e-9


def _as_points(omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if w.ndim == 1:
        w = w[None, :]
    return w


@dataclass(frozen=True)
class AngularFunction:
    """Real trigonometric polynomial f(theta) = sum_k c_k e^{i k theta}.

    Coefficients are indexed k = -N..N and satisfy c_{-k} = conj(c_k), so
    evaluation is real. Degree N is part of the value; arithmetic pads to the
    larger degree.

    Parameters
    ----------
    coefficients : ndarray, complex, shape (2N+1,)
        Fourier coefficients in ascending k order.
    """

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coefficient array must have odd length (k = -N..N)")
        mirrored = np.conj(c[::-1])
        scale = max(1.0, float(np.max(np.abs(c))))
        if np.max(np.abs(c - mirrored)) > _REALNESS_TOL * scale:
            raise ValueError("coefficients do not describe a real function")
        c = 0.5 * (c + mirrored)  # enforce c_{-k} = conj(c_k) exactly
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    # ---------------- constructors ----------------

    @classmethod
    def zero(cls, degree: int = 0) -> "AngularFunction":
        return cls(np.zeros(2 * degree + 1, dtype=complex))

    @classmethod
    def constant(cls, value: float) -> "AngularFunction":
        return cls(np.array([value], dtype=complex))

    @classmethod
    def from_coefficients(cls, coeffs: dict[int, complex]) -> "AngularFunction":
        """Build from a sparse {k: c_k} map; missing conjugates are filled in."""
        if not coeffs:
            return cls.zero()
        given = {int(k): complex(v) for k, v in coeffs.items()}
        n = max(abs(k) for k in given)
        c = np.zeros(2 * n + 1, dtype=complex)
        for k, v in given.items():
            c[n + k] = v
        for k in range(1, n + 1):
            if k in given and -k not in given:
                c[n - k] = np.conj(given[k])
            elif -k in given and k not in given:
                c[n + k] = np.conj(given[-k])
        return cls(c)

    @classmethod
    def from_samples(cls, values: Sequence[float]) -> "AngularFunction":
        """Interpolate 2N+1 equispaced samples v_j = f(2 pi j / (2N+1))."""
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.size % 2 != 1:
            raise ValueError("need an odd number of equispaced samples")
        m = v.size
        n = (m - 1) // 2
        spec = np.fft.fft(v) / m  # order 0..N, -N..-1
        c = np.concatenate([spec[n + 1:], spec[:n + 1]])
        return cls(c)

    @classmethod
    def from_callable(cls, f: Callable, degree: int = DEFAULT_DEGREE) -> "AngularFunction":
        theta = np.arange(2 * degree + 1) * 2 * np.pi / (2 * degree + 1)
        return cls.from_samples(np.asarray(f(theta), dtype=float))

    @classmethod
    def harmonic(cls, k: int, cos_amp: float = 0.0, sin_amp: float = 0.0) -> "AngularFunction":
        """cos_amp * cos(k theta) + sin_amp * sin(k theta)."""
        if k == 0:
            return cls.constant(cos_amp)
        return cls.from_coefficients({k: (cos_amp - 1j * sin_amp) / 2,
                                      -k: (cos_amp + 1j * sin_amp) / 2})

    # ---------------- basic queries ----------------

    @property
    def degree(self) -> int:
        return (self.coefficients.size - 1) // 2

    def mean(self) -> float:
        return float(self.coefficients[self.degree].real)

    def __call__(self, theta):
        th = np.asarray(theta, dtype=float)
        scalar = th.ndim == 0
        th = np.atleast_1d(th)
        n = self.degree
        ks = np.arange(-n, n + 1)
        vals = np.exp(1j * np.outer(th, ks)) @ self.coefficients
        out = vals.real
        return float(out[0]) if scalar else out

    def max_abs(self, samples: int = 4096) -> float:
        theta = np.arange(samples) * 2 * np.pi / samples
        return float(np.max(np.abs(self(theta))))

    # ---------------- calculus ----------------

    def derivative(self) -> "AngularFunction":
        n = self.degree
        ks = np.arange(-n, n + 1)
        return AngularFunction(self.coefficients * 1j * ks)

    def antiderivative(self, mean_tol: float = MEAN_TOL) -> "AngularFunction":
        """Zero-mean periodic antiderivative; requires a zero-mean profile."""
        if abs(self.mean()) > mean_tol:
            raise NonzeroMean(f"profile mean {self.mean():.3e} exceeds {mean_tol:.1e}")
        n = self.degree
        ks = np.arange(-n, n + 1)
        out = np.zeros_like(self.coefficients)
        nz = ks != 0
        out[nz] = self.coefficients[nz] / (1j * ks[nz])
        return AngularFunction(out)

    def shift(self, delta: float) -> "AngularFunction":
        """Profile of theta -> f(theta + delta)."""
        n = self.degree
        ks = np.arange(-n, n + 1)
        return AngularFunction(self.coefficients * np.exp(1j * ks * delta))

    # ---------------- algebra ----------------

    def _padded(self, n: int) -> np.ndarray:
        pad = n - self.degree
        if pad == 0:
            return np.array(self.coefficients)
        return np.pad(self.coefficients, (pad, pad))

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = AngularFunction.constant(float(other))
        n = max(self.degree, other.degree)
        return AngularFunction(self._padded(n) + other._padded(n))

    __radd__ = __add__

    def __neg__(self):
        return AngularFunction(-self.coefficients)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = AngularFunction.constant(float(other))
        return self + (-other)

    def __mul__(self, scalar: float):
        return AngularFunction(self.coefficients * float(scalar))

    __rmul__ = __mul__

    def coefficient(self, k: int) -> complex:
        n = self.degree
        if abs(k) > n:
            return 0j
        return complex(self.coefficients[n + k])

    def distance(self, other: "AngularFunction") -> float:
        n = max(self.degree, other.degree)
        return float(np.max(np.abs(self._padded(n) - other._padded(n))))

    # ---------------- serialization ----------------

    def to_triples(self) -> list[list[float]]:
        n = self.degree
        return [[int(k - n), float(self.coefficients[k].real), float(self.coefficients[k].imag)]
                for k in range(2 * n + 1)]

    @classmethod
    def from_triples(cls, triples) -> "AngularFunction":
        return cls.from_coefficients({int(k): re + 1j * im for k, re, im in triples})

    def to_json(self) -> str:
        return json.dumps(self.to_triples())

    @classmethod
    def from_json(cls, text: str) -> "AngularFunction":
        return cls.from_triples(json.loads(text))


def zero_mean_antiderivative(f: AngularFunction, mean_tol: float = MEAN_TOL) -> AngularFunction:
    """Unique zero-mean periodic antiderivative of a zero-mean profile."""
    return f.antiderivative(mean_tol=mean_tol)


# ===================================================================
# sphere grid and sampled sphere functions
# ===================================================================

_PHI = (1.0 + np.sqrt(5.0)) / 2.0


def _icosahedron():
    v = []
    for a in (-1.0, 1.0):
        for b in (-_PHI, _PHI):
            v += [(0.0, a, b), (a, b, 0.0), (b, 0.0, a)]
    verts = np.array(v)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    # faces by nearest-neighbor triangles: edges are the shortest pairs
    d2 = np.sum((verts[:, None, :] - verts[None, :, :]) ** 2, axis=-1)
    edge_len = np.min(d2[d2 > 1e-9])
    adj = d2 < edge_len * 1.5
    faces = []
    n = verts.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if not adj[i, j]:
                continue
            for k in range(j + 1, n):
                if adj[i, k] and adj[j, k]:
                    faces.append((i, j, k))
    return verts, np.array(faces)


def _vertex_key(v: np.ndarray) -> tuple:
    return tuple(np.round(v + 0.0, 9))  # +0.0 folds -0.0 into 0.0


@dataclass(frozen=True)
class SphereGrid:
    """Subdivided icosahedral grid on S^2 with exact antipodal pairing."""

    vertices: np.ndarray
    faces: np.ndarray
    antipode: np.ndarray
    refinement: int
    _inv_cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def size(self) -> int:
        return self.vertices.shape[0]

    def edges(self) -> np.ndarray:
        e = set()
        for a, b, c in self.faces:
            for p, q in ((a, b), (b, c), (a, c)):
                e.add((min(p, q), max(p, q)))
        return np.array(sorted(e))

    def _face_inverses(self) -> np.ndarray:
        if "inv" not in self._inv_cache:
            tri = self.vertices[self.faces]  # (F,3,3) rows are corners
            self._inv_cache["inv"] = np.linalg.inv(np.transpose(tri, (0, 2, 1)))
        return self._inv_cache["inv"]

    def locate(self, omega: np.ndarray) -> tuple[int, np.ndarray]:
        """Containing face and gnomonic barycentric weights for a unit vector."""
        inv = self._face_inverses()
        bary = inv @ omega  # (F,3)
        mins = bary.min(axis=1)
        sums = bary.sum(axis=1)
        ok = sums > 1e-12
        score = np.where(ok, mins / np.where(ok, sums, 1.0), -np.inf)
        fi = int(np.argmax(score))
        w = bary[fi]
        w = w / w.sum()
        return fi, w


_GRID_CACHE: dict[int, SphereGrid] = {}


def sphere_grid(refinement: int = 4) -> SphereGrid:
    """Icosphere with 10*4^r + 2 nodes, antipodally closed bit-for-bit."""
    if refinement in _GRID_CACHE:
        return _GRID_CACHE[refinement]
    verts, faces = _icosahedron()
    verts = [np.array(v) for v in verts]
    index = {_vertex_key(v): i for i, v in enumerate(verts)}
    faces = [tuple(f) for f in faces]
    for _ in range(refinement):
        midpoint_of = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key in midpoint_of:
                return midpoint_of[key]
            m = verts[i] + verts[j]
            m = m / np.linalg.norm(m)
            vk = _vertex_key(m)
            if vk in index:
                idx = index[vk]
            else:
                idx = len(verts)
                verts.append(m)
                index[vk] = idx
            midpoint_of[key] = idx
            return idx

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    v = np.array(verts)
    # canonical antipodal closure: overwrite each pair's second member with -first
    antipode = np.full(v.shape[0], -1, dtype=int)
    index = {_vertex_key(p): i for i, p in enumerate(v)}
    for i in range(v.shape[0]):
        if antipode[i] >= 0:
            continue
        j = index.get(_vertex_key(-v[i]))
        if j is None:
            raise RuntimeError("grid not antipodally closed")
        v[j] = -v[i]
        antipode[i], antipode[j] = j, i
    v.flags.writeable = False
    f = np.array(faces)
    f.flags.writeable = False
    antipode.flags.writeable = False
    grid = SphereGrid(vertices=v, faces=f, antipode=antipode, refinement=refinement)
    _GRID_CACHE[refinement] = grid
    return grid


@dataclass(frozen=True)
class SphereFunction:
    """Real function on S^2 sampled at icosphere nodes.

    Off-node evaluation uses gnomonic barycentric interpolation on the
    containing face (order 1, O(h^2) for smooth functions); node evaluation
    is exact, and antipodal node pairs are exact by grid construction.
    """

    grid: SphereGrid
    values: np.ndarray
    order: int = 1

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.size,):
            raise ValueError("one value per grid node required")
        vals = np.array(vals)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, f: Callable, refinement: int = 4) -> "SphereFunction":
        grid = sphere_grid(refinement)
        try:
            vals = np.asarray(f(grid.vertices), dtype=float)
            if vals.shape != (grid.size,):
                raise ValueError
        except Exception:
            vals = np.array([float(f(p)) for p in grid.vertices])
        return cls(grid=grid, values=vals)

    def __call__(self, omega) -> float:
        w = np.asarray(omega, dtype=float)
        w = w / np.linalg.norm(w)
        # exact node hit first
        hits = np.nonzero(np.all(np.abs(self.grid.vertices - w) < 1e-12, axis=1))[0]
        if hits.size:
            return float(self.values[hits[0]])
        fi, bary = self.grid.locate(w)
        return float(self.values[self.grid.faces[fi]] @ bary)

    def antipodal_map(self) -> "SphereFunction":
        return SphereFunction(self.grid, self.values[self.grid.antipode], self.order)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def __add__(self, other: "SphereFunction") -> "SphereFunction":
        if other.grid is not self.grid:
            raise ValueError("sphere functions live on different grids")
        return SphereFunction(self.grid, self.values + other.values, self.order)

    def __neg__(self) -> "SphereFunction":
        return SphereFunction(self.grid, -self.values, self.order)

    def __sub__(self, other: "SphereFunction") -> "SphereFunction":
        return self + (-other)

    def __mul__(self, scalar: float) -> "SphereFunction":
        return SphereFunction(self.grid, self.values * float(scalar), self.order)

    __rmul__ = __mul__

    def to_csv(self, path) -> None:
        data = np.column_stack([self.grid.vertices, self.values])
        np.savetxt(path, data, delimiter=",", header="x,y,z,value", comments="")

    @classmethod
    def from_csv(cls, path, refinement: int = 4) -> "SphereFunction":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        grid = sphere_grid(refinement)
        if data.shape[0] != grid.size:
            raise ValueError("row count does not match the grid")
        # rows may be permuted; match by position key
        index = {_vertex_key(p): i for i, p in enumerate(grid.vertices)}
        vals = np.zeros(grid.size)
        for row in data:
            key = _vertex_key(np.round(row[:3], 9))
            if key not in index:
                raise ValueError("vertex does not belong to the grid")
            vals[index[key]] = row[3]
        return cls(grid=grid, values=vals)


def antipodal_difference(f, omega) -> float:
    """f(omega) - f(-omega) for a circle profile (2-vector) or sphere function."""
    w = np.asarray(omega, dtype=float)
    if isinstance(f, AngularFunction):
        if w.shape != (2,):
            raise ValueError("circle profiles take a direction in the plane")
        theta = float(np.arctan2(w[1], w[0]))
        return float(f(theta) - f(theta + np.pi))
    if isinstance(f, SphereFunction):
        if w.shape != (3,):
            raise ValueError("sphere functions take a direction in 3-space")
        return float(f(w) - f(-w))
    raise TypeError("expected AngularFunction or SphereFunction")
