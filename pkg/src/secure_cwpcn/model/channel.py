"""
Geometry, path loss and fading-state generation.

Every node other than the primary transmitter is dropped uniformly (in area)
inside a ring centered on it. Channel power gains are path loss times a
unit-mean exponential small-scale factor. Secondary-user arrays carry an
extra leading entry for the virtual user (index 0) whose gains are zero.
"""

import logging
from dataclasses import dataclass, fields
from typing import TYPE_CHECKING, List, Optional, Sequence, Union

import numpy as np

if TYPE_CHECKING:
    from ..config.settings import NetworkConfig

logger = logging.getLogger("secure-cwpcn.channel")

ArrayLike = Union[float, Sequence[float], np.ndarray]


def dbw_to_watts(x_dbw: float) -> float:
    """Convert decibel-watts to watts."""
    return float(10.0 ** (x_dbw / 10.0))


def pathloss_linear(distance: ArrayLike, config: "NetworkConfig") -> Union[float, np.ndarray]:
    """
    Linear path-loss gain ``10^(-(a + b log10 d)/10)``.

    Args:
        distance: Distance(s) in meters
        config: Supplies the intercept ``a`` and slope ``b`` in dB

    Returns:
        Gain with the same shape as ``distance`` (a float for scalars)

    Raises:
        ValueError: If any distance is not positive
    """
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise ValueError(f"Distances must be positive and finite, got {distance}")

    loss_db = config.pathloss_intercept_db + config.pathloss_exponent_coeff_db * np.log10(d)
    gain = 10.0 ** (-loss_db / 10.0)
    return float(gain) if gain.ndim == 0 else gain


@dataclass(frozen=True, eq=False)
class Topology:
    """2-D node positions in meters. The primary transmitter sits at the origin."""

    prx: np.ndarray
    chap: np.ndarray
    sus: np.ndarray
    eavs: np.ndarray

    @property
    def ptx(self) -> np.ndarray:
        return np.zeros(2)

    @property
    def num_sus(self) -> int:
        return self.sus.shape[0]

    @property
    def num_eavs(self) -> int:
        return self.eavs.shape[0]

    def distance_ptx_prx(self) -> float:
        return float(np.linalg.norm(self.prx))

    def distance_ptx_chap(self) -> float:
        return float(np.linalg.norm(self.chap))

    def distances_ptx_sus(self) -> np.ndarray:
        return np.linalg.norm(self.sus, axis=1)

    def distances_ptx_eavs(self) -> np.ndarray:
        return np.linalg.norm(self.eavs, axis=1)

    def distances_sus_chap(self) -> np.ndarray:
        return np.linalg.norm(self.sus - self.chap, axis=1)

    def distances_sus_prx(self) -> np.ndarray:
        return np.linalg.norm(self.sus - self.prx, axis=1)

    def distances_sus_eavs(self) -> np.ndarray:
        """Matrix of shape (K, N)."""
        return np.linalg.norm(self.sus[:, None, :] - self.eavs[None, :, :], axis=2)


def _sample_annulus(
    rng: np.random.Generator, inner: float, outer: float, size: int
) -> np.ndarray:
    # inverse CDF of the radius for a uniform-in-area draw
    radius = np.sqrt(inner**2 + rng.random(size) * (outer**2 - inner**2))
    angle = rng.uniform(0.0, 2.0 * np.pi, size)
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])


def sample_topology(config: "NetworkConfig", rng: np.random.Generator) -> Topology:
    """
    Drop every node uniformly over its ring.

    The receiver uses the ``prx`` ring; the access point, secondary users and
    eavesdroppers share the ``node`` ring.
    """
    geometry = config.geometry
    prx = _sample_annulus(rng, geometry.prx_inner, geometry.prx_outer, 1)[0]
    chap = _sample_annulus(rng, geometry.node_inner, geometry.node_outer, 1)[0]
    sus = _sample_annulus(rng, geometry.node_inner, geometry.node_outer, config.num_sus)
    eavs = _sample_annulus(rng, geometry.node_inner, geometry.node_outer, config.num_eavs)
    return Topology(prx=prx, chap=chap, sus=sus, eavs=eavs)


_SCALAR_GAINS = ("h_pp", "h_psr")


@dataclass(frozen=True, eq=False)
class FadingState:
    """
    Linear channel power gains of one fading block.

    Secondary-user arrays have length K+1 (``h_se`` has shape (K+1, N)); row 0
    is the virtual user and is identically zero. Arrays are made read-only on
    construction so a state can be shared between workers.
    """

    h_ss: np.ndarray
    h_sp: np.ndarray
    h_se: np.ndarray
    h_pp: float
    h_pst: np.ndarray
    h_psr: float
    h_pe: np.ndarray

    def __post_init__(self):
        for field in fields(self):
            value = getattr(self, field.name)
            if field.name in _SCALAR_GAINS:
                object.__setattr__(self, field.name, float(value))
            else:
                array = np.array(value, dtype=float)
                array.setflags(write=False)
                object.__setattr__(self, field.name, array)

        k_plus_1 = self.h_ss.shape[0]
        if self.h_sp.shape != (k_plus_1,) or self.h_pst.shape != (k_plus_1,):
            raise ValueError("h_ss, h_sp and h_pst must share shape (K+1,)")
        if self.h_se.ndim != 2 or self.h_se.shape != (k_plus_1, self.h_pe.shape[0]):
            raise ValueError("h_se must have shape (K+1, N) matching h_pe")

        for field in fields(self):
            value = np.asarray(getattr(self, field.name))
            if not np.all(np.isfinite(value)) or np.any(value < 0):
                raise ValueError(f"Gain {field.name} must be finite and nonnegative")

        if self.h_ss[0] or self.h_sp[0] or self.h_pst[0] or np.any(self.h_se[0]):
            raise ValueError("Gains of the virtual user (index 0) must be zero")

    @classmethod
    def from_real_gains(
        cls,
        h_ss: ArrayLike,
        h_sp: ArrayLike,
        h_se: ArrayLike,
        h_pp: float,
        h_pst: ArrayLike,
        h_psr: float,
        h_pe: ArrayLike,
    ) -> "FadingState":
        """
        Build a state from gains of the K real users, prepending the virtual one.

        Example:
            >>> FadingState.from_real_gains(
            ...     h_ss=[1.0], h_sp=[0.5], h_se=[[0.2]], h_pp=1.0,
            ...     h_pst=[1.0], h_psr=0.1, h_pe=[0.3])
        """
        h_se = np.atleast_2d(np.asarray(h_se, dtype=float))
        return cls(
            h_ss=np.concatenate([[0.0], np.asarray(h_ss, dtype=float)]),
            h_sp=np.concatenate([[0.0], np.asarray(h_sp, dtype=float)]),
            h_se=np.vstack([np.zeros((1, h_se.shape[1])), h_se]),
            h_pp=h_pp,
            h_pst=np.concatenate([[0.0], np.asarray(h_pst, dtype=float)]),
            h_psr=h_psr,
            h_pe=np.asarray(h_pe, dtype=float),
        )

    @property
    def num_sus(self) -> int:
        """K, the number of real secondary users."""
        return self.h_ss.shape[0] - 1

    @property
    def num_eavs(self) -> int:
        return self.h_pe.shape[0]


def draw_fading_state(
    topology: Topology, config: "NetworkConfig", rng: np.random.Generator
) -> FadingState:
    """
    Draw one block of gains: path loss times i.i.d. unit-mean exponential fading.

    Args:
        topology: Node positions
        config: Path-loss parameters
        rng: Generator consumed for the small-scale factors

    Returns:
        FadingState with a zero virtual-user row
    """
    k, n = topology.num_sus, topology.num_eavs

    def faded(mean: np.ndarray) -> np.ndarray:
        return mean * rng.exponential(1.0, size=np.shape(mean))

    h_ss = faded(pathloss_linear(topology.distances_sus_chap(), config))
    h_sp = faded(pathloss_linear(topology.distances_sus_prx(), config))
    h_se = faded(pathloss_linear(topology.distances_sus_eavs(), config).reshape(k, n))
    h_pst = faded(pathloss_linear(topology.distances_ptx_sus(), config))
    h_pe = faded(pathloss_linear(topology.distances_ptx_eavs(), config))
    h_pp = float(faded(np.array(pathloss_linear(topology.distance_ptx_prx(), config))))
    h_psr = float(faded(np.array(pathloss_linear(topology.distance_ptx_chap(), config))))

    return FadingState.from_real_gains(
        h_ss=h_ss, h_sp=h_sp, h_se=h_se, h_pp=h_pp, h_pst=h_pst, h_psr=h_psr, h_pe=h_pe
    )


def state_rng(seed: int, replicate: int, index: int) -> np.random.Generator:
    """Generator of fading state ``index`` in ``replicate``; independent of draw order."""
    return np.random.default_rng([seed, replicate, 1, index])


def topology_rng(seed: int, replicate: int) -> np.random.Generator:
    """Generator of the shared topology when positions are held fixed."""
    return np.random.default_rng([seed, replicate, 0, 0])


def generate_ensemble(
    config: "NetworkConfig",
    num_states: int,
    seed: Optional[int] = None,
    replicate: int = 0,
) -> List[FadingState]:
    """
    Generate a reproducible ensemble of fading states.

    State ``i`` draws from its own counter-derived stream, so any subset of
    the ensemble can be regenerated independently. Positions are redrawn for
    every state unless ``config.fixed_topology`` is set.

    Args:
        config: Network configuration
        num_states: Ensemble size
        seed: Root seed, defaults to ``config.seed``
        replicate: Replicate index mixed into every stream

    Returns:
        List of FadingState in index order
    """
    if num_states < 1:
        raise ValueError("num_states must be at least 1")

    root = config.seed if seed is None else seed
    fixed = sample_topology(config, topology_rng(root, replicate)) if config.fixed_topology else None

    states = []
    for index in range(num_states):
        rng = state_rng(root, replicate, index)
        topology = fixed if fixed is not None else sample_topology(config, rng)
        states.append(draw_fading_state(topology, config, rng))

    logger.debug(
        f"Generated {num_states} fading states (seed={root}, replicate={replicate}, "
        f"K={config.num_sus}, N={config.num_eavs})"
    )
    return states
