"""Discretization parameters shared by the quadrature layers."""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Resolution:
    n_theta: int = 64          # rays per polar grid
    n_r: int = 64              # radial Simpson intervals (even)
    base_cells: int = 16       # initial parameter cells per axis for extrinsic regions
    cut_resolution: float = 0.125  # boundary cells refined to ambient size <= cut_resolution * r
    gauss_order: int = 3       # tensor Gauss-Legendre order on interior cells
    cut_order: int = 6         # Gauss order on boundary-cut pieces
    r_panels: int = 16         # Simpson panels for 1-D radius integrals
    interior_tol: float = 1e-7  # relative tolerance of adaptive refinement
    max_cells: int = 400_000   # subdivision budget
    ode_rtol: float = 1e-9
    ode_atol: float = 1e-9

    def __post_init__(self):
        if self.n_r % 2:
            object.__setattr__(self, "n_r", self.n_r + 1)
        for name in ("n_theta", "n_r", "base_cells", "gauss_order", "cut_order", "r_panels", "max_cells"):
            if getattr(self, name) <= 0:
                raise ValueError(f"resolution {name} must be positive")
        if not (self.cut_resolution > 0 and self.ode_rtol > 0 and self.ode_atol > 0):
            raise ValueError("resolution tolerances must be positive")

    def scaled(self, k: float) -> "Resolution":
        """Refine every discretization parameter by the factor ``k`` (ODE tolerances kept)."""
        if k == 1:
            return self
        return replace(
            self,
            n_theta=max(4, int(round(self.n_theta * k))),
            n_r=max(2, 2 * int(round(self.n_r * k / 2))),
            cut_resolution=self.cut_resolution / k,
            r_panels=max(2, 2 * int(round(self.r_panels * k / 2))),
            interior_tol=self.interior_tol / k ** 4,
            max_cells=int(self.max_cells * k * k),
        )

    def to_dict(self):
        return asdict(self)


DEFAULT = Resolution()
