"""End-to-end key sessions: sound, quantize, exchange syndromes, decode.

One session runs ``n`` independent coherence blocks of two-way sounding,
interleaves the real/imaginary parts of the sampled coefficients into a
data vector of length ``N = 2 n L``, and reconciles: Alice quantizes,
publishes the per-plane syndromes, and keeps her coset index as the key;
Bob decodes her quantized vector from his own observations plus the
syndromes and extracts the same index.  The public message costs ``m`` bits
of leakage budget; the key has ``N - m`` bits (per plane for 4-level data)
and reveals nothing through the syndrome by the coset argument.

``sweep_rate_vs_snr`` maps post-decoding key bit error rate over a
rate/SNR grid and reports the waterfall threshold per rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, build_snr_profile, sample_paths, time_coefficients
from .codec import (
    SparseParityCheck,
    construct_irregular,
    construct_regular,
    coset_index,
    decode_binary,
    decode_quaternary,
    decode_with_phase_offset,
    evidence_to_llr,
)
from .quantize import Quantizer, hard_evidence, quantize, soft_evidence
from .rng import derive_seed, split_streams
from .sounding import MeasurementPair, interleave

PHASE_MODES = ("none", "constant_theta", "per_block_theta")
DECODING_MODES = ("soft", "hard")

# Default irregular variable-degree profile for the waterfall experiments.
IRREGULAR_VAR_PROFILE = {2: 0.5, 3: 0.3, 8: 0.2}

MIN_SWEEP_RATE = 0.25
BER_TARGET = 1e-3


@dataclass(frozen=True)
class SessionConfig:
    """Everything one key-generation session needs."""

    channel: ChannelConfig
    snr_f_db: float
    blocks: int
    quantizer: Quantizer
    code: SparseParityCheck
    code_lsb: SparseParityCheck | None = None
    decoding_mode: str = "soft"
    phase_mode: str = "none"
    theta_grid_size: int = 16
    theta: float | None = None
    max_iter: int = 50
    seed: int | tuple = 0

    def __post_init__(self):
        if self.decoding_mode not in DECODING_MODES:
            raise ValueError(f"decoding_mode must be one of {DECODING_MODES}")
        if self.phase_mode not in PHASE_MODES:
            raise ValueError(f"phase_mode must be one of {PHASE_MODES}")
        n_data = 2 * self.blocks * self.channel.num_delay_bins
        if self.code.n != n_data:
            raise ValueError(
                f"code length {self.code.n} != data length 2nL = {n_data}")
        if self.quantizer.levels == 4:
            lsb = self.code_lsb if self.code_lsb is not None else self.code
            if lsb.n != n_data:
                raise ValueError("LSB plane code length mismatch")
        if self.phase_mode != "none":
            if self.quantizer.levels != 2 or self.decoding_mode != "soft":
                raise ValueError("rotation tracking needs binary soft decoding")
            if self.theta_grid_size < 1:
                raise ValueError("theta_grid_size must be >= 1")

    @property
    def planes(self):
        if self.quantizer.levels == 2:
            return (self.code,)
        return (self.code, self.code_lsb if self.code_lsb is not None else self.code)

    @property
    def public_message_bits(self) -> int:
        return sum(p.m for p in self.planes)

    @property
    def key_bits(self) -> int:
        return sum(p.n - p.m for p in self.planes)


@dataclass
class KeySessionResult:
    """Outcome and achievability diagnostics of one session."""

    key_a: np.ndarray
    key_b: np.ndarray
    agreed: bool
    bit_error_rate: float
    key_length: int
    public_message_length: int
    leakage_bound: float
    uniformity_stat: float
    iterations_used: int
    syndrome_satisfied: bool
    theta_error: float | None = None
    public_message: np.ndarray | None = None

    @property
    def key_a_hex(self) -> str:
        return _bits_to_hex(self.key_a)

    @property
    def key_b_hex(self) -> str:
        return _bits_to_hex(self.key_b)

    @property
    def public_message_hex(self) -> str:
        if self.public_message is None:
            return ""
        return _bits_to_hex(self.public_message)


def _bits_to_hex(bits: np.ndarray) -> str:
    if bits.size == 0:
        return ""
    return np.packbits(bits).tobytes().hex()


def monobit_z(bits: np.ndarray) -> float:
    """Standardized excess of ones over zeros (0 for a perfectly balanced key)."""
    if bits.size == 0:
        return 0.0
    return float((2.0 * bits.sum() - bits.size) / math.sqrt(bits.size))


def _session_vectors(config: SessionConfig):
    """Simulate all blocks: Alice/Bob data vectors plus per-entry law."""
    profile = build_snr_profile(config.channel, config.snr_f_db)
    L = config.channel.num_delay_bins
    streams = split_streams(config.seed, config.blocks + 1)
    theta_rng = streams[-1]
    grid = 2.0 * np.pi * np.arange(config.theta_grid_size) / config.theta_grid_size

    if config.phase_mode == "none":
        thetas = np.zeros(config.blocks)
    elif config.theta is not None:
        thetas = np.full(config.blocks, float(config.theta))
    elif config.phase_mode == "constant_theta":
        thetas = np.full(config.blocks, grid[theta_rng.integers(0, grid.size)])
    else:  # per_block_theta
        thetas = grid[theta_rng.integers(0, grid.size, size=config.blocks)]

    noise_scale = math.sqrt(profile.noise_var / 2.0)
    a_rows = np.empty((config.blocks, 2 * L))
    b_obs = np.empty((config.blocks, L), dtype=complex)
    for i in range(config.blocks):
        rng = streams[i]
        h = time_coefficients(sample_paths(config.channel, rng), config.channel)
        noise = rng.standard_normal((2, L)) + 1j * rng.standard_normal((2, L))
        pair = MeasurementPair(
            obs_a=h + noise_scale * noise[0],
            obs_b=(h + noise_scale * noise[1]) * np.exp(1j * thetas[i]),
            noise_var=profile.noise_var,
            phase_offset=thetas[i],
        )
        a_rows[i] = interleave(pair.obs_a)
        b_obs[i] = pair.obs_b

    sigma_h2 = profile.per_bin_snr * profile.noise_var
    sigma_complex = np.sqrt(sigma_h2 + profile.noise_var)
    rho = profile.rho_time
    per_block_rho = np.repeat(rho, 2)
    per_block_sigma = np.repeat(sigma_complex, 2)
    rho_vec = np.tile(per_block_rho, config.blocks)
    sigma_vec = np.tile(per_block_sigma, config.blocks)
    return a_rows.reshape(-1), b_obs, rho_vec, sigma_vec, thetas


def run_session(config: SessionConfig) -> KeySessionResult:
    """Execute one full key-generation session."""
    x_raw, b_obs, rho_vec, sigma_vec, thetas = _session_vectors(config)
    q = config.quantizer
    source_std = sigma_vec / math.sqrt(2.0)
    alice = quantize(x_raw, q, scale=source_std)
    y_raw = np.concatenate([interleave(row) for row in b_obs])

    theta_error = None
    if q.levels == 2:
        pcm = config.code
        s = pcm.syndrome(alice.symbols)
        public = s
        key_a = coset_index(pcm, alice.symbols)
        if config.phase_mode != "none":
            grid = 2.0 * np.pi * np.arange(config.theta_grid_size) \
                / config.theta_grid_size
            groups = None
            if config.phase_mode == "per_block_theta":
                L = config.channel.num_delay_bins
                groups = np.repeat(np.arange(config.blocks), 2 * L)
            result = decode_with_phase_offset(
                pcm, s, b_obs.reshape(-1), grid, rho_vec, sigma_vec, q,
                config.max_iter, groups=groups)
            hats = np.atleast_1d(result.theta_hat)
            ref = thetas if hats.size > 1 else thetas[:1]
            err = np.angle(np.exp(1j * (hats - ref)))
            theta_error = float(np.max(np.abs(err)))
        elif config.decoding_mode == "soft":
            ev = soft_evidence(y_raw, rho_vec, sigma_vec, q)
            result = decode_binary(pcm, s, evidence_to_llr(ev), config.max_iter)
        else:
            bob = quantize(y_raw, q, scale=source_std)
            ev = hard_evidence(bob.symbols, rho_vec, q)
            result = decode_binary(pcm, s, evidence_to_llr(ev), config.max_iter)
        key_b = coset_index(pcm, result.estimate)
    else:
        pcm_m, pcm_l = config.planes
        s_m = pcm_m.syndrome(alice.plane_m)
        s_l = pcm_l.syndrome(alice.plane_l)
        public = np.concatenate([s_m, s_l])
        key_a = np.concatenate([coset_index(pcm_m, alice.plane_m),
                                coset_index(pcm_l, alice.plane_l)])
        if config.decoding_mode == "soft":
            ev = soft_evidence(y_raw, rho_vec, sigma_vec, q)
        else:
            bob = quantize(y_raw, q, scale=source_std)
            ev = hard_evidence(bob.symbols, rho_vec, q)
        result = decode_quaternary(pcm_m, pcm_l, s_m, s_l, ev, config.max_iter)
        key_b = np.concatenate([coset_index(pcm_m, result.estimate // 2),
                                coset_index(pcm_l, result.estimate % 2)])

    agreed = bool(np.array_equal(key_a, key_b))
    ber = float(np.mean(key_a != key_b)) if key_a.size else 0.0
    return KeySessionResult(
        key_a=key_a,
        key_b=key_b,
        agreed=agreed,
        bit_error_rate=ber,
        key_length=int(key_a.size),
        public_message_length=config.public_message_bits,
        leakage_bound=0.0,
        uniformity_stat=monobit_z(key_a),
        iterations_used=result.iterations_used,
        syndrome_satisfied=result.syndrome_satisfied,
        theta_error=theta_error,
        public_message=public,
    )


# ---------------------------------------------------------------------------
# rate/SNR sweeps


def feasible_regular_rates(n: int, col_weight: int = 3):
    """Code rates whose row weight comes out integral for this block length."""
    rates = []
    for m in range(1, n):
        if (col_weight * n) % m == 0:
            rates.append(1.0 - m / n)
    return sorted(rates)


def make_plane_code(n: int, rate: float, family: str, seed) -> SparseParityCheck:
    """Build one plane code of the requested design rate."""
    m = round(n * (1.0 - rate))
    if family == "regular":
        return construct_regular(n, m, 3, seed)
    if family == "irregular":
        return construct_irregular(n, m, IRREGULAR_VAR_PROFILE, None, seed)
    raise ValueError("family must be 'regular' or 'irregular'")


@dataclass
class SweepRow:
    rate: float
    snr_db: float
    sessions: int
    agreed: int
    ber: float
    key_bits_per_session: int

    def achieved(self) -> bool:
        return self.ber <= BER_TARGET


def sweep_rate_vs_snr(template: SessionConfig, rates, snr_grid, trials: int,
                      family: str = "regular") -> list[SweepRow]:
    """Aggregate key BER over a (rate, SNR) grid for one decoder variant.

    ``template`` fixes everything but the code and SNR.  Rates below 0.25
    are skipped (too little secrecy to be interesting).  Trial seeds derive
    deterministically from the template seed, and are matched across rates
    and SNRs so variant comparisons see identical channels.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    n_data = 2 * template.blocks * template.channel.num_delay_bins
    rows = []
    for rate in rates:
        if rate < MIN_SWEEP_RATE:
            continue
        code = make_plane_code(n_data, rate, family,
                               derive_seed(template.seed, 0xC0DE))
        for snr_db in snr_grid:
            errors = 0
            bits = 0
            agreed = 0
            key_bits = 0
            for t in range(trials):
                cfg = SessionConfig(
                    channel=template.channel,
                    snr_f_db=snr_db,
                    blocks=template.blocks,
                    quantizer=template.quantizer,
                    code=code,
                    decoding_mode=template.decoding_mode,
                    phase_mode=template.phase_mode,
                    theta_grid_size=template.theta_grid_size,
                    max_iter=template.max_iter,
                    seed=derive_seed(template.seed, t),
                )
                res = run_session(cfg)
                errors += int(round(res.bit_error_rate * res.key_length))
                bits += res.key_length
                agreed += int(res.agreed)
                key_bits = res.key_length
            rows.append(SweepRow(rate=rate, snr_db=snr_db, sessions=trials,
                                 agreed=agreed, ber=errors / bits,
                                 key_bits_per_session=key_bits))
    return rows


def waterfall_thresholds(rows) -> dict:
    """Per rate, the lowest swept SNR meeting the BER target (None if none)."""
    out: dict[float, float | None] = {}
    for row in rows:
        out.setdefault(row.rate, None)
        if row.achieved():
            if out[row.rate] is None or row.snr_db < out[row.rate]:
                out[row.rate] = row.snr_db
    return out
