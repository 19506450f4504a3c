from dataclasses import dataclass, fields, replace
from typing import Any, Dict

from . import exceptions as ex


@dataclass(frozen=True)
class Config:
    """
    Tuning knobs of a training / prediction run.

    Args:
        n_imp: Number of points of the other label an ellipsoid may contain.
        tol_fit: Relative optimality tolerance of the ellipsoid fit.
        tol_qp: Duality gap tolerance of the reduced convex hull solver.
        tol_membership: Slack on ``|Ax + b| <= 1`` when testing membership.
        abstain_band: Predictions whose trust is within this distance of 0.5
            are flagged as abstentions.
        jitter_radius_frac: Half-width of the noise added to constant
            features, relative to the feature magnitude.
        seed: Seed of every random draw of the run.
        folds: Number of cross validation folds, ``0`` for a single split.
        test_fraction: Held-out fraction when ``folds == 0``.
        max_iter_fit: Iteration cap of the ellipsoid fit.
        max_iter_qp: Iteration cap of the reduced convex hull solver.
        tie_tolerance: Relative distance within which exterior points count
            as equidistant from several ellipsoids.
    """

    n_imp: int = 0
    tol_fit: float = 1e-7
    tol_qp: float = 1e-9
    tol_membership: float = 1e-9
    abstain_band: float = 0.05
    jitter_radius_frac: float = 0.01
    seed: int = 0
    folds: int = 0
    test_fraction: float = 0.2
    max_iter_fit: int = 100_000
    max_iter_qp: int = 50_000
    tie_tolerance: float = 1e-6

    def __post_init__(self):
        if self.n_imp < 0:
            raise ex.InvalidConfig("n_imp", self.n_imp, "must be >= 0")
        for name in ("tol_fit", "tol_qp", "tol_membership", "tie_tolerance"):
            if not getattr(self, name) > 0:
                raise ex.InvalidConfig(name, getattr(self, name), "must be > 0")
        if not 0 <= self.abstain_band < 0.5:
            raise ex.InvalidConfig(
                "abstain_band", self.abstain_band, "must be in [0, 0.5)"
            )
        if not self.jitter_radius_frac > 0:
            raise ex.InvalidConfig(
                "jitter_radius_frac", self.jitter_radius_frac, "must be > 0"
            )
        if self.folds < 0 or self.folds == 1:
            raise ex.InvalidConfig("folds", self.folds, "must be 0 or >= 2")
        if not 0 < self.test_fraction < 1:
            raise ex.InvalidConfig(
                "test_fraction", self.test_fraction, "must be in (0, 1)"
            )
        for name in ("max_iter_fit", "max_iter_qp"):
            if getattr(self, name) < 1:
                raise ex.InvalidConfig(name, getattr(self, name), "must be >= 1")

    def evolve(self, **changes: Any) -> "Config":
        """
        Returns a copy of this config with ``changes`` applied (and validated).
        """
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config":
        """
        Builds a config from a mapping, ignoring unknown keys.
        """
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


DEFAULT_CONFIG = Config()
