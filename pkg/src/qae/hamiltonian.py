"""Model vibrational Hamiltonians in truncated cosine and Fourier bases.

Reduced units: hbar = 1, energies and harmonic frequencies in cm^-1, masses
dimensionless. The kinetic operator is diagonal in both bases; potential
matrix elements use composite trapezoid quadrature.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ProblemTooLargeError
from .linalg import SymMatrix

# Half-width of the oscillator box in units of 1/sqrt(omega). 5 covers the
# classical turning points up to roughly the twelfth level.
HALF_WIDTH = 5.0
# Narrower box used by the oscillator benchmarks. With three cosine functions
# it places the ground energy inside the lambda scan windows used for the
# 1D/2D/3D benchmarks (scans starting at 380, 880 and 1580 cm^-1).
BENCHMARK_HALF_WIDTH = 2.75

MORSE_OMEGA = 1600.0
MORSE_ANHARMONICITY = 12.0
MORSE_R_E = 1.0

MAX_DIMENSIONS = 5
DEFAULT_VARIABLE_CAP = 5000


@dataclass(frozen=True)
class BasisSpec:
    kind: str  # "cosine" or "fourier"
    m_max: int
    domain: tuple
    quadrature_points: int = None

    def __post_init__(self):
        if self.kind not in ("cosine", "fourier"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.m_max < 0:
            raise ValueError("m_max must be non-negative")
        lo, hi = (float(v) for v in self.domain)
        if not hi > lo:
            raise ValueError("domain must satisfy x_max > x_min")
        object.__setattr__(self, "domain", (lo, hi))
        if self.quadrature_points is None:
            object.__setattr__(self, "quadrature_points", 16 * self.size)
        elif self.quadrature_points < 4 * self.size:
            raise ValueError(
                f"quadrature_points={self.quadrature_points} below 4*B={4 * self.size}"
            )

    @property
    def size(self):
        return self.m_max + 1 if self.kind == "cosine" else 2 * self.m_max + 1

    @property
    def length(self):
        return self.domain[1] - self.domain[0]

    def functions(self, x):
        """Basis functions evaluated on ``x``; row ``alpha`` is function ``alpha``."""
        L = self.length
        u = np.asarray(x, dtype=np.float64) - self.domain[0]
        rows = [np.full_like(u, math.sqrt(1.0 / L))]
        if self.kind == "cosine":
            for m in range(1, self.m_max + 1):
                rows.append(math.sqrt(2.0 / L) * np.cos(m * math.pi * u / L))
        else:
            for m in range(1, self.m_max + 1):
                rows.append(math.sqrt(2.0 / L) * np.cos(2.0 * math.pi * m * u / L))
                rows.append(math.sqrt(2.0 / L) * np.sin(2.0 * math.pi * m * u / L))
        return np.array(rows)

    def kinetic(self, mass):
        L = self.length
        if self.kind == "cosine":
            k = [m * math.pi / L for m in range(self.m_max + 1)]
        else:
            k = [0.0]
            for m in range(1, self.m_max + 1):
                k += [2.0 * math.pi * m / L] * 2
        return np.array([kk * kk / (2.0 * mass) for kk in k])


@dataclass(frozen=True)
class Harmonic:
    omega: float
    center: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    def __call__(self, x, mass=1.0):
        return 0.5 * mass * self.omega**2 * (np.asarray(x) - self.center) ** 2


@dataclass(frozen=True)
class Morse:
    depth: float
    alpha: float
    r_e: float

    def __post_init__(self):
        if not (self.depth > 0 and self.alpha > 0):
            raise ValueError("Morse depth and alpha must be positive")

    @classmethod
    def from_spectroscopic(cls, omega, anharmonicity, r_e, mass=1.0):
        """Parameters giving levels omega*(n+1/2) - anharmonicity*(n+1/2)^2."""
        depth = omega**2 / (4.0 * anharmonicity)
        alpha = omega * math.sqrt(mass / (2.0 * depth))
        return cls(depth, alpha, r_e)

    def levels(self, count, mass=1.0):
        omega = self.alpha * math.sqrt(2.0 * self.depth / mass)
        wx = omega**2 / (4.0 * self.depth)
        return [omega * (n + 0.5) - wx * (n + 0.5) ** 2 for n in range(count)]

    def __call__(self, x, mass=1.0):
        return self.depth * (1.0 - np.exp(-self.alpha * (np.asarray(x) - self.r_e))) ** 2


@dataclass(frozen=True)
class Tabulated:
    grid: tuple
    values: tuple

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.float64)
        if grid.ndim != 1 or grid.size < 2 or len(self.values) != grid.size:
            raise ValueError("tabulated potential needs matching grid/values of length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("tabulated grid must be strictly increasing")
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def from_csv(cls, path):
        grid, values = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    x, v = float(row[0]), float(row[1])
                except ValueError:
                    continue  # header line
                grid.append(x)
                values.append(v)
        return cls(tuple(grid), tuple(values))

    def __call__(self, x, mass=1.0):
        x = np.asarray(x, dtype=np.float64)
        if x.min() < self.grid[0] or x.max() > self.grid[-1]:
            raise ValueError("tabulated potential evaluated outside its grid")
        return np.interp(x, self.grid, self.values)


@dataclass(frozen=True)
class DimensionSpec:
    basis: BasisSpec
    potential: object
    mass: float = 1.0


@dataclass(frozen=True)
class ProblemSpec:
    dims: tuple = field(default_factory=tuple)

    def __post_init__(self):
        dims = tuple(self.dims)
        if not 1 <= len(dims) <= MAX_DIMENSIONS:
            raise ValueError(f"supported dimensions are 1..{MAX_DIMENSIONS}")
        if len({dim.basis.size for dim in dims}) != 1:
            raise ValueError("every dimension must use the same basis size")
        object.__setattr__(self, "dims", dims)

    @property
    def d(self):
        return len(self.dims)

    @property
    def basis_size(self):
        return self.dims[0].basis.size

    @property
    def dimension(self):
        return self.basis_size**self.d


def build_1d_hamiltonian(basis, potential, mass=1.0):
    x = np.linspace(basis.domain[0], basis.domain[1], basis.quadrature_points)
    v = np.asarray(potential(x, mass), dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("potential is not finite on the quadrature grid")
    w = np.full(x.size, x[1] - x[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    phi = basis.functions(x)
    h = (phi * (v * w)) @ phi.T
    h = 0.5 * (h + h.T)
    h[np.diag_indices_from(h)] += basis.kinetic(mass)
    return SymMatrix(h)


def build_product_hamiltonian(spec, qubits_per_coeff=1, variable_cap=DEFAULT_VARIABLE_CAP):
    """Separable Hamiltonian on the direct-product basis.

    The first dimension is the slowest-varying index, matching the qubit
    layout of :func:`qae.qubo_map.variable_index`.
    """
    B, d = spec.basis_size, spec.d
    if qubits_per_coeff * B**d > variable_cap:
        raise ProblemTooLargeError(
            f"K*B^d = {qubits_per_coeff * B**d} exceeds the variable cap {variable_cap}"
        )
    blocks = [build_1d_hamiltonian(dim.basis, dim.potential, dim.mass).array for dim in spec.dims]
    if d == 1:
        return SymMatrix(blocks[0])
    eye = np.eye(B)
    total = np.zeros((B**d, B**d))
    for i, block in enumerate(blocks):
        term = np.ones((1, 1))
        for j in range(d):
            term = np.kron(term, block if j == i else eye)
        total += term
    return SymMatrix(total)


def harmonic_frequencies(d):
    return [800.0 + 200.0 * i for i in range(d)]


def harmonic_problem(d, m_max=2, omegas=None, half_width=HALF_WIDTH, mass=1.0,
                     quadrature_points=None):
    """d-dimensional oscillator in cosine bases, one box per dimension.

    Each box spans ``+-half_width / sqrt(mass * omega)`` around the minimum.
    """
    omegas = list(omegas) if omegas is not None else harmonic_frequencies(d)
    if len(omegas) != d:
        raise ValueError("need one frequency per dimension")
    dims = []
    for omega in omegas:
        w = half_width / math.sqrt(mass * omega)
        basis = BasisSpec("cosine", m_max, (-w, w), quadrature_points)
        dims.append(DimensionSpec(basis, Harmonic(omega), mass))
    return ProblemSpec(tuple(dims))


def harmonic_benchmark(d, m_max=2):
    """Oscillator set-up used by the convergence, scaling and noise studies."""
    return harmonic_problem(d, m_max, half_width=BENCHMARK_HALF_WIDTH)


def morse_surrogate_default(m_max=4):
    """Morse stand-in for a diatomic stretch: levels near 797 and 2373 cm^-1.

    Fourier basis with ``m_max = 4`` (B = 9) on
    ``[r_e - 3.5/sqrt(omega), r_e + 4.5/sqrt(omega)]``.
    """
    mass = 1.0
    pot = Morse.from_spectroscopic(MORSE_OMEGA, MORSE_ANHARMONICITY, MORSE_R_E, mass)
    s = 1.0 / math.sqrt(MORSE_OMEGA)
    basis = BasisSpec("fourier", m_max, (MORSE_R_E - 3.5 * s, MORSE_R_E + 4.5 * s))
    return basis, pot, mass


def morse_problem(m_max=4):
    basis, pot, mass = morse_surrogate_default(m_max)
    return ProblemSpec((DimensionSpec(basis, pot, mass),))


def _potential_from_config(cfg):
    kind = cfg["kind"]
    if kind == "harmonic":
        return Harmonic(float(cfg["omega"]), float(cfg.get("center", 0.0)))
    if kind == "morse":
        return Morse(float(cfg["depth"]), float(cfg["alpha"]), float(cfg["r_e"]))
    if kind == "tabulated":
        if "csv" in cfg:
            return Tabulated.from_csv(cfg["csv"])
        return Tabulated(tuple(cfg["grid"]), tuple(cfg["values"]))
    raise ValueError(f"unknown potential kind {kind!r}")


def problem_from_config(cfg):
    """Build a :class:`ProblemSpec` from a decoded JSON object.

    Either ``{"preset": "harmonic" | "harmonic_benchmark" | "morse", ...}`` or
    an explicit ``{"dims": [{"basis": {...}, "potential": {...}, "mass": 1}]}``.
    """
    preset = cfg.get("preset")
    if preset == "harmonic":
        return harmonic_problem(
            int(cfg.get("d", 1)),
            int(cfg.get("m_max", 2)),
            cfg.get("omegas"),
            float(cfg.get("half_width", HALF_WIDTH)),
            float(cfg.get("mass", 1.0)),
            cfg.get("quadrature_points"),
        )
    if preset == "harmonic_benchmark":
        return harmonic_benchmark(int(cfg.get("d", 1)), int(cfg.get("m_max", 2)))
    if preset == "morse":
        return morse_problem(int(cfg.get("m_max", 4)))
    if preset is not None:
        raise ValueError(f"unknown preset {preset!r}")
    dims = []
    for dim in cfg["dims"]:
        b = dim["basis"]
        basis = BasisSpec(b["kind"], int(b["m_max"]), tuple(b["domain"]), b.get("quadrature_points"))
        dims.append(DimensionSpec(basis, _potential_from_config(dim["potential"]), float(dim.get("mass", 1.0))))
    return ProblemSpec(tuple(dims))
