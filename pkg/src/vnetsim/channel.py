"""RF and THz link budgets: SINR, interference, noise and Shannon rate.

Pure functions over small parameter structs. Everything is linear (not dB)
internally; dB/dBm converters are provided for the config boundary. RNG is
always passed in explicitly so callers own stream partitioning.

Sub-6GHz links see Rayleigh fading (unit-mean exponential power) and
distance^-alpha path loss. THz links are LOS with molecular absorption
exp(-K_a r) on top of spreading loss r^-2; the absorbed energy re-radiates
as extra noise, and narrow-beam interferers only count when their beams
happen to align (probability F_tx*F_rx per side).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import Boltzmann, speed_of_light

SPEED_OF_LIGHT = speed_of_light  # 299792458.0 m/s
REF_TEMP_K = 290.0               # standard link-budget reference temperature

# default per-tier bandwidths and the matching thermal noise floors
BANDWIDTH_RF_HZ = 4.0e7
BANDWIDTH_THZ_HZ = 5.0e8


def thermal_noise_w(bandwidth_hz: float, temp_k: float = REF_TEMP_K) -> float:
    """k_B * T * W noise power in watts."""
    return Boltzmann * temp_k * bandwidth_hz


NOISE_RF_W = thermal_noise_w(BANDWIDTH_RF_HZ)
NOISE_THZ_W = thermal_noise_w(BANDWIDTH_THZ_HZ)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(x_w: float) -> float:
    return 10.0 * math.log10(x_w) + 30.0


@dataclass(frozen=True)
class RfParams:
    """Sub-6GHz link parameters (all linear units)."""

    tx_power_w: float = 1.0
    tx_gain: float = 1.0
    rx_gain: float = 1.0
    carrier_hz: float = 3.5e9
    pathloss_exp: float = 4.0
    noise_w: float = NOISE_RF_W

    def validate(self):
        if min(self.tx_power_w, self.tx_gain, self.rx_gain,
               self.carrier_hz, self.noise_w) <= 0:
            raise ValueError("RfParams fields must be strictly positive")
        if self.pathloss_exp < 2:
            raise ValueError("pathloss_exp must be >= 2")


@dataclass(frozen=True)
class ThzParams:
    """THz link parameters.

    main/side gains are the two-level beam pattern; align_prob_* is the
    probability a given lobe points at a random interferer (F = theta/2pi).
    Side lobes default to 0 (negligible).
    """

    tx_power_w: float = 1.0
    main_gain_tx: float = 316.2
    main_gain_rx: float = 316.2
    side_gain_tx: float = 0.0
    side_gain_rx: float = 0.0
    carrier_hz: float = 1.0e12
    absorption_per_m: float = 0.05
    thermal_noise_w: float = NOISE_THZ_W
    beamwidth_tx_rad: float = 2.0 * math.pi * 0.1
    beamwidth_rx_rad: float = 2.0 * math.pi * 0.1
    align_prob_tx: float = 0.1
    align_prob_rx: float = 0.1

    def validate(self):
        if min(self.tx_power_w, self.main_gain_tx, self.main_gain_rx,
               self.carrier_hz, self.thermal_noise_w) <= 0:
            raise ValueError("ThzParams core fields must be strictly positive")
        if not (0.0 <= self.align_prob_tx <= 1.0 and 0.0 <= self.align_prob_rx <= 1.0):
            raise ValueError("alignment probabilities must lie in [0, 1]")
        if self.side_gain_tx > self.main_gain_tx or self.side_gain_rx > self.main_gain_rx:
            raise ValueError("side gains must not exceed main gains")
        if self.absorption_per_m < 0:
            raise ValueError("absorption_per_m must be >= 0")


@dataclass(frozen=True)
class LinkGeometry:
    """Serving distance plus same-tier interferer distances, meters."""

    serving_dist_m: float
    interferer_dists_m: tuple = ()

    def validate(self):
        if self.serving_dist_m <= 0 or any(d <= 0 for d in self.interferer_dists_m):
            raise ValueError("all link distances must be > 0")


@dataclass(frozen=True)
class ChannelDraw:
    """Per-step random state of one link evaluation.

    interferer_alignments is None in expected-alignment mode (the F_tx*F_rx
    factor is applied deterministically); in sampled mode it holds one gain
    product D per interferer.
    """

    serving_fade: float = 1.0
    interferer_fades: tuple = ()
    interferer_alignments: tuple | None = None


def rf_constant(params: RfParams) -> float:
    """gamma_R = G_tx * G_rx * (c / 4 pi f_R)^2."""
    lam = SPEED_OF_LIGHT / (4.0 * math.pi * params.carrier_hz)
    return params.tx_gain * params.rx_gain * lam * lam


def thz_constant(params: ThzParams) -> float:
    """gamma_T = G_max_tx * G_max_rx * (c / 4 pi f_T)^2."""
    lam = SPEED_OF_LIGHT / (4.0 * math.pi * params.carrier_hz)
    return params.main_gain_tx * params.main_gain_rx * lam * lam


def rf_sinr(params: RfParams, geom: LinkGeometry, draw: ChannelDraw) -> float:
    """SINR of one sub-6GHz link.

    signal = gamma_R * P * H_i * r^-alpha; interference sums the same
    expression over the co-channel interferer list with their own fades.

    Args:
        params: link parameters.
        geom: serving + interferer distances.
        draw: fading samples; draw.interferer_fades must match
            geom.interferer_dists_m in length.

    Returns:
        SINR (linear, >= 0; exactly 0 when the serving fade is 0).
    """
    if len(draw.interferer_fades) != len(geom.interferer_dists_m):
        raise ValueError("interferer fade list must match interferer distance list")
    geom.validate()
    gamma = rf_constant(params)
    p = params.tx_power_w
    signal = gamma * p * draw.serving_fade * geom.serving_dist_m ** (-params.pathloss_exp)
    interference = 0.0
    for r_k, h_k in zip(geom.interferer_dists_m, draw.interferer_fades):
        interference += gamma * p * h_k * r_k ** (-params.pathloss_exp)
    return signal / (params.noise_w + interference)


def thz_noise(params: ThzParams, geom: LinkGeometry, alignments=None) -> float:
    """Cumulative thermal + molecular absorption noise on a THz link.

    N_T = N_0
        + P * gamma_T * r^-2 * (1 - e^(-K_a r))                (serving link)
        + sum_k  c_k * P * r_k^-2 * (1 - e^(-K_a r_k))         (interferers)

    where c_k = gamma_T * F_tx * F_rx in expected-alignment mode, or the
    sampled gain product D_k times (c/4 pi f)^2 when alignments are given.

    Args:
        params: THz link parameters.
        geom: serving + interferer distances.
        alignments: optional per-interferer sampled gain products.

    Returns:
        N_T in watts, always >= N_0.
    """
    if alignments is not None and len(alignments) != len(geom.interferer_dists_m):
        raise ValueError("alignment list must match interferer distance list")
    geom.validate()
    gamma = thz_constant(params)
    p = params.tx_power_w
    k_a = params.absorption_per_m
    r = geom.serving_dist_m
    total = params.thermal_noise_w
    total += p * gamma * r ** -2.0 * (1.0 - math.exp(-k_a * r))
    spread = (SPEED_OF_LIGHT / (4.0 * math.pi * params.carrier_hz)) ** 2
    for idx, r_k in enumerate(geom.interferer_dists_m):
        if alignments is None:
            c_k = gamma * params.align_prob_tx * params.align_prob_rx
        else:
            c_k = alignments[idx] * spread
        total += c_k * p * r_k ** -2.0 * (1.0 - math.exp(-k_a * r_k))
    return total


def thz_sinr(params: ThzParams, geom: LinkGeometry, draw: ChannelDraw) -> float:
    """SINR of one THz link (serving beams fully aligned).

    numerator = gamma_T * P * e^(-K_a r) * r^-2; the denominator is
    thz_noise(...) plus same-tier interference, where each interferer
    carries either the expected alignment factor F_tx*F_rx or its sampled
    gain product D from the draw.

    Args:
        params: THz link parameters.
        geom: serving + interferer distances.
        draw: draw.interferer_alignments selects sampled-alignment mode;
            fades are ignored (no small-scale fading on THz links).

    Returns:
        SINR (linear, >= 0).
    """
    alignments = draw.interferer_alignments
    if alignments is not None and len(alignments) != len(geom.interferer_dists_m):
        raise ValueError("alignment list must match interferer distance list")
    geom.validate()
    gamma = thz_constant(params)
    p = params.tx_power_w
    k_a = params.absorption_per_m
    r = geom.serving_dist_m
    numerator = gamma * p * math.exp(-k_a * r) * r ** -2.0
    spread = (SPEED_OF_LIGHT / (4.0 * math.pi * params.carrier_hz)) ** 2
    interference = 0.0
    for idx, r_k in enumerate(geom.interferer_dists_m):
        if alignments is None:
            c_k = gamma * params.align_prob_tx * params.align_prob_rx
        else:
            c_k = alignments[idx] * spread
        interference += c_k * p * r_k ** -2.0 * math.exp(-k_a * r_k)
    noise = thz_noise(params, geom, alignments)
    return numerator / (noise + interference)


def antenna_gain(params: ThzParams, theta_rad: float, side: str = "tx") -> float:
    """Two-level beam pattern: main-lobe gain inside the beamwidth, side gain outside.

    theta is normalized into [-pi, pi); the boundary |theta| == w_q is inside
    the main lobe.
    """
    if side == "tx":
        width, g_max, g_min = params.beamwidth_tx_rad, params.main_gain_tx, params.side_gain_tx
    elif side == "rx":
        width, g_max, g_min = params.beamwidth_rx_rad, params.main_gain_rx, params.side_gain_rx
    else:
        raise ValueError("side must be 'tx' or 'rx'")
    theta = (theta_rad + math.pi) % (2.0 * math.pi) - math.pi
    return g_max if abs(theta) <= width else g_min


def alignment_support(params: ThzParams):
    """The four gain products D can take and their probabilities."""
    ft, fr = params.align_prob_tx, params.align_prob_rx
    values = np.array([
        params.main_gain_tx * params.main_gain_rx,
        params.main_gain_tx * params.side_gain_rx,
        params.side_gain_tx * params.main_gain_rx,
        params.side_gain_tx * params.side_gain_rx,
    ])
    probs = np.array([ft * fr, ft * (1.0 - fr), (1.0 - ft) * fr, (1.0 - ft) * (1.0 - fr)])
    return values, probs


def sample_alignment(params: ThzParams, rng: np.random.Generator, size=None):
    """Draw the interferer gain product D (four-point distribution)."""
    values, probs = alignment_support(params)
    idx = rng.choice(4, size=size, p=probs)
    return values[idx] if size is not None else float(values[idx])


def sample_fading(rng: np.random.Generator, size=None):
    """Unit-mean exponential power sample (Rayleigh amplitude squared)."""
    out = rng.exponential(1.0, size=size)
    return out if size is not None else float(out)


def link_rate(bandwidth_hz: float, sinr: float) -> float:
    """Shannon rate W * log2(1 + SINR) in bits/s."""
    if sinr < 0:
        raise ValueError("sinr must be >= 0")
    return bandwidth_hz * math.log2(1.0 + sinr)


# ---------------------------------------------------------------------------
# vectorized fast paths used by the environment hot loop
#
# Same math as the scalar ops above, evaluated for every (AV, BS) pair of one
# tier at once. dist[j, i] is the distance from AV j to BS i; each column i in
# turn acts as the serving BS with the remaining columns as interferers.
# Consistency with the scalar route is pinned by tests.
# ---------------------------------------------------------------------------

def rf_sinr_matrix(params: RfParams, dist: np.ndarray, fades: np.ndarray) -> np.ndarray:
    """SINR of every AV/RBS pair. dist and fades share shape (n_av, n_rbs)."""
    gamma = rf_constant(params)
    recv = gamma * params.tx_power_w * fades * dist ** (-params.pathloss_exp)
    total = recv.sum(axis=1, keepdims=True)
    return recv / (params.noise_w + total - recv)


def thz_sinr_matrix(params: ThzParams, dist: np.ndarray,
                    alignments: np.ndarray | None = None) -> np.ndarray:
    """SINR of every AV/TBS pair, shape (n_av, n_tbs).

    alignments, when given, holds the sampled gain product for each pair in
    its interferer role; None applies the expected F_tx*F_rx factor.
    """
    gamma = thz_constant(params)
    p = params.tx_power_w
    decay = np.exp(-params.absorption_per_m * dist)
    inv_sq = dist ** -2.0
    recv = gamma * p * decay * inv_sq          # full-gain received power
    absorb = gamma * p * inv_sq * (1.0 - decay)
    if alignments is None:
        factor = np.full_like(dist, params.align_prob_tx * params.align_prob_rx)
    else:
        factor = alignments / (params.main_gain_tx * params.main_gain_rx)
    intf_pool = (factor * recv).sum(axis=1, keepdims=True)
    noise_pool = (factor * absorb).sum(axis=1, keepdims=True)
    interference = intf_pool - factor * recv
    noise = params.thermal_noise_w + absorb + noise_pool - factor * absorb
    return recv / (noise + interference)
