"""Numerical tolerances and conventions shared across the package.

All values are engineering choices; change them through :class:`Tolerances`
rather than editing call sites.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

# Constant c in [P, P] = c * phi_M, where the coordinate bracket is
# [P, Q]^{ijk} = sum_cyc sum_l (P^{li} d_l Q^{jk} + Q^{li} d_l P^{jk}) and the
# bivector tensor of P = sum C_{jk} d_j ^ d_k is P^{jk} = C_{jk} - C_{kj}.
# Measured by ``qp.calibrate_bracket_constant`` on su3 (on su2 the conjugation
# trivector vanishes identically, so su2 cannot fix c); tests re-measure it.
QP_BRACKET_CONSTANT = -1.0

DEFAULT_SEED = 42
DEFAULT_FD_STEP = 1e-3
DEFAULT_T_GRID = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class Tolerances:
    orthonormal: float = 1e-12
    ad_invariance: float = 1e-10
    group_residual: float = 1e-10
    exp_log: float = 1e-10
    eta_series: float = 1e-10
    antisymmetry: float = 1e-12
    psi_identity: float = 1e-12
    fd_equivariance: float = 1e-6
    quasi_poisson: float = 1e-5
    c_consistency: float = 1e-6
    jacobi_fd: float = 1e-6
    family_fd: float = 1e-7
    fiber_condition: float = 1e-5
    candidate_antisymmetry: float = 1e-7
    candidate_invariance: float = 1e-6
    conjugacy: float = 1e-8
    rank_distribution: float = 1e-8
    rank_jacobian: float = 1e-7
    level_set: float = 1e-9
    stabilizer: float = 1e-9
    omega_condition: float = 1e6
    slope_window: tuple = (0.9, 1.1)
    slope_min: float = 0.9
    slope_min_mult: float = 1.9
    lambda_oracle: float = 1e-12

    def to_dict(self):
        return asdict(self)

    def replace(self, **changes):
        data = self.to_dict()
        unknown = set(changes) - set(data)
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        data.update(changes)
        return Tolerances(**data)


DEFAULT_TOLERANCES = Tolerances()


@dataclass
class RunConfig:
    """Settings shared by the batch drivers and the command line."""

    group: str = "su2"
    seed: int = DEFAULT_SEED
    n_samples: int = 20
    fd_step: float = DEFAULT_FD_STEP
    tolerances: Tolerances = field(default_factory=Tolerances)
    t_grid: tuple = DEFAULT_T_GRID
    output: str | None = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.fd_step <= 0:
            raise ValueError("fd_step must be positive")
        grid = tuple(float(t) for t in self.t_grid)
        if not grid or any(t <= 0 for t in grid):
            raise ValueError("t_grid must be strictly positive")
        if any(b >= a for a, b in zip(grid, grid[1:])):
            raise ValueError("t_grid must be strictly decreasing")
        self.t_grid = grid

    def to_dict(self):
        return {
            "group": self.group,
            "seed": self.seed,
            "n_samples": self.n_samples,
            "fd_step": self.fd_step,
            "t_grid": list(self.t_grid),
            "tolerances": {k: (list(v) if isinstance(v, tuple) else v)
                           for k, v in self.tolerances.to_dict().items()},
        }
